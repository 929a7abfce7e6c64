#include <gtest/gtest.h>

#include <random>

#include "gfm/types.hpp"

using namespace gfm;

namespace {

Signature sig_r2() { return Signature{{{"R", 2}}, {}}; }
Signature sig_r2p1() { return Signature{{{"R", 2}, {"P", 1}}, {}}; }
Signature sig_r2p1c() { return Signature{{{"R", 2}, {"P", 1}}, {"c"}}; }

// Independent oracle for count_types: multiply the per-relation factors
// one doubling at a time instead of shifting by the summed exponent.
cpp_int count_types_oracle(const Signature& sig, int k) {
  cpp_int result = 1;
  long long base = k + static_cast<long long>(sig.consts.size());
  for (const auto& r : sig.rels) {
    long long tuples = 1;
    for (int i = 0; i < r.arity; ++i) tuples *= base;
    for (long long i = 0; i < tuples; ++i) result *= 2;
  }
  return result;
}

}  // namespace

TEST(AtomTable, CanonicalOrderR2) {
  Signature sig = sig_r2();
  AtomTable t = AtomTable::make(sig, 2);
  ASSERT_EQ(t.atom_count(), 4);
  EXPECT_EQ(t.atom_text(0, sig), "R(x1,x1)");
  EXPECT_EQ(t.atom_text(1, sig), "R(x1,x2)");
  EXPECT_EQ(t.atom_text(2, sig), "R(x2,x1)");
  EXPECT_EQ(t.atom_text(3, sig), "R(x2,x2)");
  // Boundary atoms are exactly those using both variables.
  EXPECT_EQ(t.boundary_mask(), TypeMask{0b0110});
}

TEST(AtomTable, CanonicalOrderWithConstant) {
  Signature sig = sig_r2p1c();
  AtomTable t = AtomTable::make(sig, 1);
  // R over {x1, c} in lexicographic order, then P.
  ASSERT_EQ(t.atom_count(), 6);
  EXPECT_EQ(t.atom_text(0, sig), "R(x1,x1)");
  EXPECT_EQ(t.atom_text(1, sig), "R(x1,c)");
  EXPECT_EQ(t.atom_text(2, sig), "R(c,x1)");
  EXPECT_EQ(t.atom_text(3, sig), "R(c,c)");
  EXPECT_EQ(t.atom_text(4, sig), "P(x1)");
  EXPECT_EQ(t.atom_text(5, sig), "P(c)");
  // Atoms whose variable set is {x1}: R(x1,x1), R(x1,c), R(c,x1), P(x1).
  EXPECT_EQ(t.boundary_mask(), TypeMask{0b010111});
}

TEST(AtomTable, LevelZeroBoundaryIsEverything) {
  Signature sig = sig_r2p1c();
  AtomTable t = AtomTable::make(sig, 0);
  ASSERT_EQ(t.atom_count(), 2);  // R(c,c), P(c)
  EXPECT_EQ(t.boundary_mask(), TypeMask{0b11});
}

TEST(AtomTable, IndexOfRoundTrip) {
  Signature sig = sig_r2p1c();
  AtomTable t = AtomTable::make(sig, 2);
  for (int i = 0; i < t.atom_count(); ++i) {
    const Atom& a = t.atom(i);
    EXPECT_EQ(t.index_of(a.rel, a.args), i);
  }
}

TEST(CountTypes, FrozenValues) {
  EXPECT_EQ(count_types(sig_r2(), 2), cpp_int(16));
  EXPECT_EQ(count_types(sig_r2(), 1), cpp_int(2));
  EXPECT_EQ(count_types(sig_r2(), 0), cpp_int(1));
  EXPECT_EQ(count_types(Signature{{{"R", 1}}, {"c"}}, 0), cpp_int(2));
  EXPECT_EQ(count_types(Signature{{{"R", 3}}, {}}, 3), cpp_int(134217728));  // 2^27
  EXPECT_EQ(count_types(Signature{{{"P", 1}}, {}}, 1), cpp_int(2));
  EXPECT_EQ(count_types(sig_r2p1(), 1), cpp_int(4));
}

TEST(CountTypes, MatchesIndependentProduct) {
  std::vector<Signature> sigs = {
      sig_r2(), sig_r2p1(), sig_r2p1c(),
      Signature{{{"T", 3}}, {}},
      Signature{{{"A", 1}, {"B", 2}, {"C", 3}}, {"c", "d"}},
  };
  for (const auto& sig : sigs)
    for (int k = 0; k <= 3; ++k)
      EXPECT_EQ(count_types(sig, k), count_types_oracle(sig, k));
}

TEST(CountTypes, MatchesEnumeration) {
  // Exhaustive agreement between the closed-form count and the actual
  // enumeration wherever the latter is feasible.
  std::vector<Signature> sigs = {sig_r2(), sig_r2p1(), sig_r2p1c(), Signature{{{"P", 1}, {"Q", 1}}, {}}};
  for (const auto& sig : sigs) {
    for (int k = 0; k <= 2; ++k) {
      AtomTable t = AtomTable::make(sig, k);
      std::uint64_t seen = 0;
      TypeMask prev = 0;
      bool first = true;
      enumerate_types(t, std::uint64_t(1) << 20, [&](TypeMask m) {
        if (!first) { EXPECT_LT(prev, m) << "canonical order must be ascending"; }
        prev = m;
        first = false;
        ++seen;
      });
      EXPECT_EQ(cpp_int(seen), count_types(sig, k));
    }
  }
}

TEST(CountTypes, MonotoneInArity) {
  for (const auto& sig : {sig_r2(), sig_r2p1c()})
    for (int k = 0; k < 3; ++k)
      EXPECT_LE(count_types(sig, k), count_types(sig, k + 1));
}

TEST(Reduct, Transposition) {
  Signature sig = sig_r2();
  AtomTable t2 = AtomTable::make(sig, 2);
  TypeMask tau = 0b0010;  // {R(x1,x2)}
  int idx[] = {1, 0};     // select x2,x1
  EXPECT_EQ(reduct(sig, t2, tau, idx), TypeMask{0b0100});  // {R(x2,x1)}
}

TEST(Reduct, IdentityAndDrop) {
  Signature sig = sig_r2p1c();
  AtomTable t2 = AtomTable::make(sig, 2);
  std::mt19937_64 rng(7);
  int id2[] = {0, 1};
  int drop1[] = {0};
  int drop2[] = {1};
  AtomTable t1 = AtomTable::make(sig, 1);
  for (int it = 0; it < 50; ++it) {
    TypeMask tau = rng() & ((TypeMask(1) << t2.atom_count()) - 1);
    EXPECT_EQ(reduct(sig, t2, tau, id2), tau);
    // Drop to one variable: both selections keep exactly the atoms over the
    // kept variable and constants.
    TypeMask r1 = reduct(sig, t2, tau, drop1);
    TypeMask r2 = reduct(sig, t2, tau, drop2);
    for (int i = 0; i < t1.atom_count(); ++i) {
      (void)i;
    }
    // x1-selection of an atom over x1 only must match the original bit.
    // R(x1,x1) is atom 0 at both levels 1 and 2 under this signature.
    EXPECT_EQ(r1 & 1, tau & 1);
    (void)r2;
  }
}

TEST(Reduct, Functoriality) {
  // reduct(reduct(tau, I), J) == reduct(tau, I o J)
  Signature sig = sig_r2p1c();
  AtomTable t2 = AtomTable::make(sig, 2);
  std::mt19937_64 rng(11);
  std::vector<std::vector<int>> selections = {{0}, {1}, {0, 1}, {1, 0}};
  for (int it = 0; it < 200; ++it) {
    TypeMask tau = rng() & ((TypeMask(1) << t2.atom_count()) - 1);
    for (const auto& I : selections) {
      AtomTable ti = AtomTable::make(sig, static_cast<int>(I.size()));
      TypeMask inner = reduct(sig, t2, tau, I);
      std::vector<std::vector<int>> subs;
      if (I.size() == 1)
        subs = {{0}};
      else
        subs = {{0}, {1}, {0, 1}, {1, 0}};
      for (const auto& J : subs) {
        std::vector<int> comp;
        for (int j : J) comp.push_back(I[j]);
        EXPECT_EQ(reduct(sig, ti, inner, J), reduct(sig, t2, tau, comp));
      }
    }
  }
}

TEST(Reduct, RejectsBadIndices) {
  Signature sig = sig_r2();
  AtomTable t2 = AtomTable::make(sig, 2);
  int dup[] = {0, 0};
  int oob[] = {2};
  EXPECT_THROW(reduct(sig, t2, 0, dup), std::invalid_argument);
  EXPECT_THROW(reduct(sig, t2, 0, oob), std::out_of_range);
}

TEST(BoundaryInterior, Partition) {
  Signature sig = sig_r2p1();
  AtomTable t = AtomTable::make(sig, 2);
  std::mt19937_64 rng(3);
  for (int it = 0; it < 100; ++it) {
    TypeMask tau = rng() & ((TypeMask(1) << t.atom_count()) - 1);
    EXPECT_EQ((boundary_of(t, tau) | interior_of(t, tau)), tau);
    EXPECT_EQ((boundary_of(t, tau) & interior_of(t, tau)), TypeMask{0});
  }
  EXPECT_EQ(boundary_of(t, 0), TypeMask{0});
}

TEST(BoundaryInterior, ConstantAtomInBoundaryOfItsSupport) {
  // {R(x1,c)} at k=1: the atom's variable set is {x1}, so it is boundary.
  Signature sig = sig_r2p1c();
  AtomTable t1 = AtomTable::make(sig, 1);
  TypeMask tau = TypeMask{1} << 1;  // R(x1,c)
  EXPECT_EQ(boundary_of(t1, tau), tau);
  // P(c) has no variables, hence interior at k=1.
  TypeMask pc = TypeMask{1} << 5;
  EXPECT_EQ(interior_of(t1, pc), pc);
}

TEST(Compatibility, FrozenExamples) {
  Signature sig = sig_r2();
  AtomTable t2 = AtomTable::make(sig, 2);
  // Differ only on boundary atoms: compatible.
  EXPECT_TRUE(compatible(t2, 0b0000, 0b0110));
  EXPECT_TRUE(compatible(t2, 0b1001, 0b1111));
  // Differ on an interior atom R(x1,x1): incompatible.
  EXPECT_FALSE(compatible(t2, 0b0001, 0b0000));

  Signature sigc{{{"P", 1}}, {"c"}};
  AtomTable t1 = AtomTable::make(sigc, 1);
  // Atoms: P(x1), P(c).  Differing on P(c) (interior at k=1): incompatible.
  EXPECT_FALSE(compatible(t1, 0b00, 0b10));
  EXPECT_TRUE(compatible(t1, 0b00, 0b01));
}

TEST(Compatibility, EquivalenceRelation) {
  Signature sig = sig_r2p1c();
  AtomTable t = AtomTable::make(sig, 2);
  std::mt19937_64 rng(13);
  for (int it = 0; it < 300; ++it) {
    TypeMask a = rng() & ((TypeMask(1) << t.atom_count()) - 1);
    TypeMask b = rng() & ((TypeMask(1) << t.atom_count()) - 1);
    TypeMask c = rng() & ((TypeMask(1) << t.atom_count()) - 1);
    EXPECT_TRUE(compatible(t, a, a));
    EXPECT_EQ(compatible(t, a, b), compatible(t, b, a));
    if (compatible(t, a, b) && compatible(t, b, c)) { EXPECT_TRUE(compatible(t, a, c)); }
  }
}

TEST(Guardedness, Rules) {
  Signature sig = sig_r2p1();
  AtomTable t0 = AtomTable::make(sig, 0);
  AtomTable t1 = AtomTable::make(sig, 1);
  AtomTable t2 = AtomTable::make(sig, 2);
  EXPECT_TRUE(is_guarded_type(t0, 0));
  EXPECT_TRUE(is_guarded_type(t1, 0));
  // {P(x1), P(x2)} at k=2: boundary empty.
  TypeMask p1p2 = (TypeMask{1} << 4) | (TypeMask{1} << 5);
  EXPECT_FALSE(is_guarded_type(t2, p1p2));
  // Any type containing R(x1,x2) is guarded.
  EXPECT_TRUE(is_guarded_type(t2, p1p2 | (TypeMask{1} << 1)));

  Signature sig3{{{"P", 3}}, {}};
  AtomTable t3 = AtomTable::make(sig3, 3);
  // {P(x1,x2,x3)}: args (0,1,2) -> index 0*9+1*3+2 = 5.
  EXPECT_TRUE(is_guarded_type(t3, TypeMask{1} << 5));
}

TEST(TypeContext, BuildsAllLevels) {
  TypeContext cx = TypeContext::make(sig_r2p1c(), 2);
  EXPECT_EQ(cx.at(0).k(), 0);
  EXPECT_EQ(cx.at(2).atom_count(), 12);  // R over 3 terms: 9, P: 3
}

TEST(EnumerateTypes, CapEnforced) {
  Signature big{{{"T", 3}}, {}};
  AtomTable t = AtomTable::make(big, 3);  // 27 atoms
  EXPECT_THROW(enumerate_types(t, std::uint64_t(1) << 20, [](TypeMask) {}), TypeSpaceError);
}

TEST(SignatureValidation, Rules) {
  EXPECT_THROW(validate_signature(Signature{{}, {}}), std::invalid_argument);
  EXPECT_THROW(validate_signature(Signature{{{"R", 0}}, {}}), std::invalid_argument);
  EXPECT_THROW(validate_signature(Signature{{{"R", 1}, {"R", 2}}, {}}), std::invalid_argument);
  EXPECT_THROW(validate_signature(Signature{{{"R", 1}}, {"R"}}), std::invalid_argument);
  EXPECT_NO_THROW(validate_signature(sig_r2p1c()));
}
