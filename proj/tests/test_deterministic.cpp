#include "gfm/deterministic.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "gfm/structure.hpp"
#include "gfm/witness.hpp"

using namespace gfm;

namespace {

NormalFormSentence nf_of(const std::string& text) {
  auto [f, sig] = parse_sentence(text);
  return nf_from_sentence(f, sig);
}

int bit_of(const TypeContext& cx, int k, int rel, std::vector<int> args) {
  return cx.at(k).index_of(rel, args);
}

bool same_facts(const FiniteStructure& a, const FiniteStructure& b) {
  if (!(a.sig() == b.sig()) || a.n() != b.n()) return false;
  for (std::size_t r = 0; r < a.sig().rels.size(); ++r) {
    int rel = static_cast<int>(r);
    if (a.fact_count(rel) != b.fact_count(rel)) return false;
    for (std::size_t i = 0; i < a.fact_count(rel); ++i) {
      auto fa = a.fact(rel, i), fb = b.fact(rel, i);
      if (!std::equal(fa.begin(), fa.end(), fb.begin(), fb.end())) return false;
    }
  }
  return true;
}

// Independent primality check by pure trial division.
bool divides_out(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Every element loops; the cross 2-types are one oriented edge each way
// plus the dense diagonal completion, so permuted queries must permute
// answers while the family stays closed.
Witness witness_oriented() {
  Signature sig{{Relation{"R", 2}}, {}};
  TypeContext cx = TypeContext::make(sig, 2);
  TypeMask l = TypeMask{1} << bit_of(cx, 1, 0, {0, 0});
  TypeMask l1 = TypeMask{1} << bit_of(cx, 2, 0, {0, 0});
  TypeMask l2 = TypeMask{1} << bit_of(cx, 2, 0, {1, 1});
  TypeMask r12 = TypeMask{1} << bit_of(cx, 2, 0, {0, 1});
  TypeMask r21 = TypeMask{1} << bit_of(cx, 2, 0, {1, 0});
  std::vector<TypeMask> fam2 = {l1 | l2 | r12, l1 | l2 | r21, l1 | l2 | r12 | r21};
  std::sort(fam2.begin(), fam2.end());
  return Witness{sig, 2, {{0}, {l}, fam2}};
}

// Reflexive loops everywhere and a single dense 2-type.
Witness witness_loops() {
  Signature sig{{Relation{"R", 2}}, {}};
  return Witness{sig, 2, {{0}, {1}, {15}}};
}

Witness witness_two_colors() {
  Signature sig{{Relation{"P", 1}, Relation{"Q", 1}}, {}};
  return Witness{sig, 1, {{0}, {1, 2}}};
}

PrimeLadder small_ladder() {
  PrimeLadder lad;
  lad.primes = {5, 7, 11};
  lad.product = 385;
  return lad;
}

// Realized family of the four-element structure where the ternary relation
// holds exactly on even element sums.  Pairs of odd elements share no
// positive atom, so the family needs densification before a deterministic
// build.
Witness parity_witness() {
  Signature sig{{Relation{"T", 3}}, {}};
  FiniteStructure s(sig, 4);
  std::vector<int> t(3);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        if ((a + b + c) % 2 == 0) {
          t = {a, b, c};
          s.add_fact(0, t);
        }
  s.finalize();
  TypeContext cx = TypeContext::make(sig, 3);
  return Witness{sig, 3, realized_family(4, cx, type_of_fn(s, cx))};
}

struct HashEquation {
  cpp_int prime;
  cpp_int h;            // demanded position in the level's enumeration
  cpp_int rest;         // the base elements' index sum within the subset
  std::size_t fam_size;
};

// Derives, straight from the definitions and bypassing the solver, the
// hash equation of every subset containing a new element at nu_layer,
// demanded to realize target (caller coordinates, new variable last)
// together with base.  A new index b is in the solution class exactly
// when (rest + b) mod prime == h for every equation.
std::vector<HashEquation> subset_equations(const LazyStructure& L,
                                           const std::vector<LazyElement>& base,
                                           int nu_layer, TypeMask target) {
  const TypeContext& cx = L.context();
  const Witness& w = L.witness();
  int k = static_cast<int>(base.size());
  std::vector<int> order(static_cast<std::size_t>(k) + 1);
  std::iota(order.begin(), order.end(), 0);
  auto layer_at = [&](int i) {
    return i < k ? base[static_cast<std::size_t>(i)].layer : nu_layer;
  };
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return layer_at(a) < layer_at(b); });
  TypeMask t2s = apply_reduct_map(reduct_map(cx.at(k + 1), cx.at(k + 1), order), target);
  int nu_pos = 0;
  while (order[static_cast<std::size_t>(nu_pos)] != k) ++nu_pos;

  std::vector<HashEquation> eqs;
  for (std::uint64_t pick = 0; pick < (std::uint64_t{1} << k); ++pick) {
    // pick selects sorted positions other than nu_pos.
    std::vector<int> members;
    int bit = 0;
    for (int p = 0; p <= k; ++p) {
      if (p == nu_pos) {
        members.push_back(p);
      } else {
        if (pick >> bit & 1) members.push_back(p);
        ++bit;
      }
    }
    int m = static_cast<int>(members.size());
    TypeMask red = apply_reduct_map(reduct_map(cx.at(k + 1), cx.at(m), members), t2s);
    const auto& fam = w.levels[static_cast<std::size_t>(m)];
    auto it = std::lower_bound(fam.begin(), fam.end(), red);
    if (it == fam.end() || *it != red)
      throw std::logic_error("demanded reduct missing from the family");
    HashEquation eq;
    eq.h = it - fam.begin();
    eq.fam_size = fam.size();
    unsigned set = 0;
    eq.rest = 0;
    for (int p : members) {
      int caller = order[static_cast<std::size_t>(p)];
      set |= 1u << layer_at(caller);
      if (caller < k) eq.rest += base[static_cast<std::size_t>(caller)].index;
    }
    eq.prime = L.ladder().primes[set - 1];
    eqs.push_back(eq);
  }
  return eqs;
}

// Asserts the solved index against every equation, in the exact reading
// and in the level-reduced one, and returns the solution class modulus.
cpp_int assert_equations(const std::vector<HashEquation>& eqs, const cpp_int& beta) {
  cpp_int class_mod = 1;
  for (const auto& eq : eqs) {
    EXPECT_EQ((eq.rest + beta) % eq.prime, eq.h);
    EXPECT_EQ((eq.rest + beta) % eq.prime % cpp_int(eq.fam_size), eq.h);
    class_mod *= eq.prime;
  }
  return class_mod;
}

TEST(Primality, AgreesWithTrialDivisionOnSmallNumbers) {
  for (std::uint64_t n = 0; n <= 2000; ++n)
    EXPECT_EQ(detail::is_prime(cpp_int(n)), divides_out(n)) << n;
}

TEST(Primality, KnownLargeValuesAndPseudoprimes) {
  EXPECT_TRUE(detail::is_prime(cpp_int(2147483647)));
  EXPECT_TRUE(detail::is_prime(cpp_int("2305843009213693951")));
  EXPECT_TRUE(detail::is_prime(cpp_int("2305843009213693967")));
  EXPECT_TRUE(detail::is_prime(cpp_int(134217757)));
  for (std::uint64_t n : {561u, 1105u, 1729u, 41041u, 63973u, 252601u})
    EXPECT_FALSE(detail::is_prime(cpp_int(n))) << n;
}

TEST(Primality, NextPrimeIsTheSmallestAtOrAbove) {
  for (std::uint64_t from = 0; from <= 320; ++from) {
    std::uint64_t expect = from < 2 ? 2 : from;
    while (!divides_out(expect)) ++expect;
    EXPECT_EQ(detail::next_prime(cpp_int(from)), cpp_int(expect)) << from;
  }
  EXPECT_EQ(detail::next_prime(cpp_int(16)), cpp_int(17));
  EXPECT_EQ(detail::next_prime(cpp_int(1) << 27), cpp_int(134217757));
}

TEST(Ladders, HandComputedLaddersMatch) {
  PrimeLadder r2 = find_primes(Signature{{Relation{"R", 2}}, {}});
  ASSERT_EQ(r2.primes.size(), 3u);
  EXPECT_EQ(r2.primes[0], cpp_int(17));
  EXPECT_EQ(r2.primes[1], cpp_int(19));
  EXPECT_EQ(r2.primes[2], cpp_int(23));
  EXPECT_EQ(r2.product, cpp_int(7429));
  EXPECT_EQ(r2.measured_c, cpp_rational(7429, 32768));

  PrimeLadder p1 = find_primes(Signature{{Relation{"P", 1}}, {}});
  ASSERT_EQ(p1.primes.size(), 1u);
  EXPECT_EQ(p1.primes[0], cpp_int(2));
  EXPECT_EQ(p1.product, cpp_int(2));
  EXPECT_EQ(p1.measured_c, cpp_rational(1, 2));

  PrimeLadder pq = find_primes(Signature{{Relation{"P", 1}, Relation{"Q", 1}}, {}});
  ASSERT_EQ(pq.primes.size(), 1u);
  EXPECT_EQ(pq.primes[0], cpp_int(5));
  EXPECT_EQ(pq.product, cpp_int(5));

  PrimeLadder t3 = find_primes(Signature{{Relation{"T", 3}}, {}});
  std::vector<std::uint64_t> expect = {134217757, 134217773, 134217779, 134217781,
                                       134217799, 134217803, 134217823};
  ASSERT_EQ(t3.primes.size(), expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i)
    EXPECT_EQ(t3.primes[i], cpp_int(expect[i]));
  EXPECT_EQ(t3.product.str(),
            "784640166403293577052482528492924434223498112141308801109");
  EXPECT_LT(t3.measured_c, cpp_rational(1));
}

TEST(Ladders, ContractHoldsAcrossSignatures) {
  std::vector<Signature> sigs = {
      {{Relation{"R", 2}}, {}},
      {{Relation{"P", 1}}, {}},
      {{Relation{"P", 1}, Relation{"Q", 1}}, {}},
      {{Relation{"R", 2}, Relation{"P", 1}}, {}},
      {{Relation{"R", 2}}, {"c"}},
      {{Relation{"E", 2}, Relation{"F", 2}}, {}},
      {{Relation{"P", 1}}, {"a", "b"}},
      {{Relation{"R", 2}, Relation{"P", 1}, Relation{"Q", 1}}, {}},
      {{Relation{"S", 2}}, {"u"}},
      {{Relation{"P", 1}, Relation{"Q", 1}, Relation{"S", 1}}, {}},
  };
  for (const Signature& sig : sigs) {
    int wd = sig.width();
    cpp_int count = count_types(sig, wd);
    PrimeLadder lad = find_primes(sig);
    ASSERT_EQ(static_cast<int>(lad.primes.size()), (1 << wd) - 1);
    cpp_int prev = 1, prod = 1;
    for (const cpp_int& p : lad.primes) {
      EXPECT_GT(p, prev);
      EXPECT_TRUE(detail::is_prime(p));
      if (p < 2000000) EXPECT_TRUE(divides_out(p.convert_to<std::uint64_t>()));
      prev = p;
      prod *= p;
    }
    EXPECT_GE(lad.primes.front(), count);
    EXPECT_EQ(lad.product, prod);
    EXPECT_EQ(lad.measured_c, cpp_rational(wd * prod, pow(count, 1u << wd)));
    EXPECT_LE(lad.measured_c, cpp_rational(cpp_int(3) << 32));
  }
}

TEST(LazyBuild, RejectsUnusableWitnessesAndLadders) {
  // Unguarded family types are fine at width 2 but not from width 3 on,
  // where repeated-layer pairs below the top level would owe extensions.
  Signature r2{{Relation{"R", 2}}, {}};
  Witness unguarded{r2, 2, {{0}, {1}, {9, 15}}};
  EXPECT_NO_THROW(LazyStructure(unguarded, small_ladder()));
  Witness undense = parity_witness();
  try {
    LazyStructure bad(undense, find_primes(undense.sig));
    FAIL() << "unguarded width-3 family accepted";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("densify"), std::string::npos);
  }

  Witness w = witness_oriented();
  PrimeLadder lad = small_ladder();
  lad.primes.pop_back();
  lad.product = 35;
  EXPECT_THROW(LazyStructure(w, lad), std::invalid_argument);
  lad = small_ladder();
  lad.primes[1] = 9;
  lad.product = 495;
  EXPECT_THROW(LazyStructure(w, lad), std::invalid_argument);
  lad = small_ladder();
  std::swap(lad.primes[0], lad.primes[1]);
  EXPECT_THROW(LazyStructure(w, lad), std::invalid_argument);
  lad = small_ladder();
  lad.product = 386;
  EXPECT_THROW(LazyStructure(w, lad), std::invalid_argument);

  Signature pq{{Relation{"P", 1}, Relation{"Q", 1}}, {}};
  Witness four{pq, 1, {{0}, {0, 1, 2, 3}}};
  PrimeLadder low;
  low.primes = {3};
  low.product = 3;
  EXPECT_THROW(LazyStructure(four, low), std::invalid_argument);

  LazyStructure L(w, small_ladder());
  std::vector<LazyElement> t3 = {{0, 1}, {1, 2}, {0, 3}};
  EXPECT_THROW(L.type_of(t3), std::invalid_argument);
  std::vector<LazyElement> badlayer = {{2, 1}};
  EXPECT_THROW(L.type_of(badlayer), std::invalid_argument);
  std::vector<LazyElement> badindex = {{0, 385}};
  EXPECT_THROW(L.type_of(badindex), std::invalid_argument);
  std::vector<LazyElement> dupe = {{0, 7}, {0, 7}};
  EXPECT_THROW(L.type_of(dupe), std::invalid_argument);

  std::vector<LazyElement> pair = {{0, 1}, {1, 2}};
  std::vector<LazyElement> samelayer = {{0, 1}, {0, 2}};
  std::vector<LazyElement> one = {{0, 1}};
  EXPECT_THROW(solve_extension(L, pair, 0, L.witness().levels[2][0]),
               std::invalid_argument);
  EXPECT_THROW(solve_extension(L, samelayer, 1, L.witness().levels[2][0]),
               std::invalid_argument);
  EXPECT_THROW(solve_extension(L, one, 0, L.witness().levels[2][0]),
               std::invalid_argument);
  EXPECT_THROW(solve_extension(L, one, 1, TypeMask{0}), std::invalid_argument);
}

TEST(LazyBuild, SameLayerPairsKeepAllNegativeBoundary) {
  Witness w = witness_loops();
  LazyStructure L(w, find_primes(w.sig));
  EXPECT_EQ(L.layers(), 2);
  EXPECT_EQ(L.layer_size(), cpp_int(7429));

  std::vector<LazyElement> empty;
  EXPECT_EQ(L.type_of(empty), TypeMask{0});
  std::vector<LazyElement> one = {{1, 7428}};
  EXPECT_EQ(L.type_of(one), TypeMask{1});
  std::vector<LazyElement> same = {{0, 3}, {0, 700}};
  EXPECT_EQ(L.type_of(same), TypeMask{9});  // both loops, no cross atoms
  std::vector<LazyElement> cross = {{0, 3}, {1, 700}};
  EXPECT_EQ(L.type_of(cross), TypeMask{15});
}

TEST(LazyBuild, TypesArePureAndCacheInvisible) {
  Witness w = witness_oriented();
  TypeContext cx = witness_context(w);
  std::vector<int> swap_idx = {1, 0};
  std::vector<int> swap_map = reduct_map(cx.at(2), cx.at(2), swap_idx);

  std::vector<std::vector<LazyElement>> probes;
  for (int r = 0; r < 24; ++r) {
    std::vector<LazyElement> t;
    t.push_back({r % 2, (r * 97 + 5) % 385});
    if (r % 3 != 0) t.push_back({(r + 1) % 2, (r * 53 + 1) % 385});
    probes.push_back(t);
  }
  probes.push_back({{0, 10}, {0, 20}});

  LazyStructure a(w, small_ladder());
  LazyStructure b(w, small_ladder(), 0);
  LazyStructure c(w, small_ladder(), 2);
  for (const auto& t : probes) {
    TypeMask first = a.type_of(t);
    EXPECT_EQ(a.type_of(t), first);
    EXPECT_EQ(b.type_of(t), first);
    EXPECT_EQ(c.type_of(t), first);
    if (t.size() == 2) {
      std::vector<LazyElement> rev = {t[1], t[0]};
      EXPECT_EQ(a.type_of(rev), apply_reduct_map(swap_map, first));
    }
  }
}

TEST(Materialize, SmallDomainsPassEveryCheck) {
  Witness tc = witness_two_colors();
  LazyStructure Ltc(tc, find_primes(tc.sig));
  TypedStructure mtc = Ltc.materialize();
  EXPECT_EQ(mtc.n(), 5);
  TypeContext tcx = witness_context(tc);
  EXPECT_TRUE(check_guarded(5, tcx, tc.levels, mtc.type_fn()).ok);
  EXPECT_TRUE(check_extension(5, tcx, tc.levels, mtc.type_fn()).ok);
  FiniteStructure stc = mtc.to_structure();
  EXPECT_EQ(stc.n(), 5);
  EXPECT_TRUE(check_guarded(5, tcx, tc.levels, type_of_fn(stc, tcx)).ok);
  EXPECT_TRUE(check_extension(5, tcx, tc.levels, type_of_fn(stc, tcx)).ok);

  Witness w = witness_oriented();
  LazyStructure L(w, small_ladder());
  TypedStructure m = L.materialize();
  EXPECT_EQ(m.n(), 770);
  TypeContext cx = witness_context(w);
  CheckReport g = check_guarded(770, cx, w.levels, m.type_fn());
  EXPECT_TRUE(g.ok) << g.first_violation;
  CheckReport e = check_extension(770, cx, w.levels, m.type_fn());
  EXPECT_TRUE(e.ok) << e.first_violation;
  FiniteStructure s = m.to_structure();
  EXPECT_EQ(s.n(), 770);

  // Arrays, exported facts, and lazy evaluation agree tuple for tuple,
  // in both variable orders.
  auto ty = type_of_fn(s, cx);
  for (int r = 0; r < 120; ++r) {
    int la = r % 2, lb = (r / 2) % 2;
    cpp_int ia = (r * 61 + 3) % 385, ib = (r * 29 + 10) % 385;
    if (la == lb && ia == ib) continue;
    std::vector<LazyElement> t = {{la, ia}, {lb, ib}};
    std::vector<int> ids = {la * 385 + ia.convert_to<int>(),
                            lb * 385 + ib.convert_to<int>()};
    TypeMask lazy = L.type_of(t);
    EXPECT_EQ(lazy, ty(2, ids));
    EXPECT_EQ(lazy, m.type_of(2, ids));
    std::vector<LazyElement> u = {{la, ia}};
    std::vector<int> uid = {ids[0]};
    EXPECT_EQ(L.type_of(u), ty(1, uid));
    EXPECT_EQ(L.type_of(u), m.type_of(1, uid));
  }
  EXPECT_EQ(m.type_of(0, {}), TypeMask{0});

  // Rebuilding gives the same facts, with no seed anywhere to vary.
  EXPECT_TRUE(same_facts(s, LazyStructure(w, small_ladder()).materialize().to_structure()));
}

TEST(Materialize, WidthTwoRunsUndensifiedWithUnguardedTypes) {
  // The all-negative pair type 9 sits in the family itself here; pairs
  // realizing it are full width, so no check may demand anything of them.
  Signature r2{{Relation{"R", 2}}, {}};
  Witness w{r2, 2, {{0}, {1}, {9, 15}}};
  ASSERT_FALSE(validate(w).all_guarded);
  LazyStructure L(w, small_ladder());
  TypedStructure m = L.materialize();
  EXPECT_EQ(m.n(), 770);
  TypeContext cx = witness_context(w);
  CheckReport g = check_guarded(770, cx, w.levels, m.type_fn());
  EXPECT_TRUE(g.ok) << g.first_violation;
  CheckReport e = check_extension(770, cx, w.levels, m.type_fn());
  EXPECT_TRUE(e.ok) << e.first_violation;

  std::vector<int> same = {3, 70};
  EXPECT_EQ(m.type_of(2, same), TypeMask{9});
  std::vector<LazyElement> lsame = {{0, 3}, {0, 70}};
  EXPECT_EQ(L.type_of(lsame), TypeMask{9});
}

TEST(Materialize, RefusesAboveTheBudgetsPointingToLazyQueries) {
  Witness w = witness_loops();
  LazyStructure L(w, find_primes(w.sig));
  try {
    L.materialize(1000);
    FAIL() << "cap ignored";
  } catch (const std::length_error& e) {
    EXPECT_NE(std::string(e.what()).find("lazy"), std::string::npos);
  }

  Witness dp = densify(parity_witness());
  LazyStructure Lp(dp, find_primes(parity_witness().sig));
  EXPECT_THROW(Lp.materialize(), std::length_error);

  // Two binary relations put the ladder at (257, 263, 269); the domain
  // passes a widened element cap but the pair table cannot.
  Signature ef{{Relation{"E", 2}, Relation{"F", 2}}, {}};
  Witness wide{ef, 2, {{0}, {1}, {9}}};
  LazyStructure Lw(wide, find_primes(ef));
  EXPECT_EQ(Lw.layer_size(), cpp_int(18181979));
  try {
    Lw.materialize(40000000);
    FAIL() << "pair budget ignored";
  } catch (const std::length_error& e) {
    EXPECT_NE(std::string(e.what()).find("pair"), std::string::npos);
  }
}

TEST(Materialize, ExportRefusesAboveTheFactBound) {
  Witness tc = witness_two_colors();
  TypedStructure m = LazyStructure(tc, find_primes(tc.sig)).materialize();
  // One unary fact per element and nothing else: five facts exactly.
  EXPECT_EQ(m.to_structure(5).fact_count(), 5u);
  try {
    m.to_structure(4);
    FAIL() << "fact bound ignored";
  } catch (const std::length_error& e) {
    EXPECT_NE(std::string(e.what()).find("facts"), std::string::npos);
  }
}

TEST(Solver, MatchesExhaustiveCongruenceScanAtWidthTwo) {
  Witness w = witness_oriented();
  LazyStructure L(w, small_ladder());
  const auto& fam1 = w.levels[1];
  const auto& fam2 = w.levels[2];

  // From the empty tuple a single congruence remains and the solution is
  // the type's own position.
  std::vector<LazyElement> empty;
  for (int layer = 0; layer < 2; ++layer) {
    cpp_int beta = solve_extension(L, empty, layer, fam1[0]);
    EXPECT_EQ(beta, cpp_int(0));
    std::vector<LazyElement> e = {{layer, beta}};
    EXPECT_EQ(L.type_of(e), fam1[0]);
  }

  for (int r = 0; r < 50; ++r) {
    std::vector<LazyElement> base = {{r % 2, (r * 37 + 11) % 385}};
    int nl = 1 - base[0].layer;
    TypeMask tau2 = fam2[static_cast<std::size_t>((r / 2) % 2)];
    cpp_int beta = solve_extension(L, base, nl, tau2);
    std::vector<LazyElement> ext = {base[0], {nl, beta}};
    EXPECT_EQ(L.type_of(ext), tau2);

    // Scan the whole index range for solutions of the congruence system;
    // they must be exactly the solver's value plus multiples of the class
    // modulus, and every one of them must realize the demanded type.
    auto eqs = subset_equations(L, base, nl, tau2);
    cpp_int class_mod = assert_equations(eqs, beta);
    std::vector<cpp_int> hits;
    for (std::uint64_t b = 0; b < 385; ++b) {
      bool all = true;
      for (const auto& eq : eqs)
        if ((eq.rest + b) % eq.prime != eq.h) {
          all = false;
          break;
        }
      if (all) hits.push_back(b);
    }
    ASSERT_FALSE(hits.empty());
    EXPECT_EQ(hits.front(), beta);
    for (std::size_t i = 1; i < hits.size(); ++i)
      EXPECT_EQ(hits[i] - hits[i - 1], class_mod);
    for (const cpp_int& b : hits) {
      std::vector<LazyElement> cand = {base[0], {nl, b}};
      EXPECT_EQ(L.type_of(cand), tau2);
    }
  }
}

TEST(Solver, ChainedDemandsAtWidthThreeSatisfyEveryEquation) {
  Witness base = parity_witness();
  ASSERT_FALSE(validate(base).all_guarded);
  Witness w = densify(base);
  ASSERT_TRUE(validate(w).all_guarded);
  std::vector<std::size_t> sizes = {1, 2, 4, 6};
  for (int k = 0; k <= 3; ++k)
    EXPECT_EQ(w.levels[static_cast<std::size_t>(k)].size(), sizes[static_cast<std::size_t>(k)]);

  // The ladder comes from the original signature; its smallest prime far
  // exceeds every family level, which is all the build relies on.
  PrimeLadder lad = find_primes(base.sig);
  LazyStructure L(w, lad);
  const TypeContext& cx = L.context();

  std::vector<std::vector<int>> down;
  for (int k = 0; k < 3; ++k) {
    std::vector<int> first(static_cast<std::size_t>(k));
    std::iota(first.begin(), first.end(), 0);
    down.push_back(reduct_map(cx.at(k + 1), cx.at(k), first));
  }

  int solves = 0, chain = 0;
  while (solves < 1000) {
    std::vector<LazyElement> tuple;
    TypeMask cur = w.levels[0][0];
    for (int k = 0; k < 3 && solves < 1000; ++k) {
      std::vector<TypeMask> cands;
      for (TypeMask c : w.levels[static_cast<std::size_t>(k) + 1])
        if (apply_reduct_map(down[static_cast<std::size_t>(k)], c) == cur)
          cands.push_back(c);
      ASSERT_FALSE(cands.empty());
      TypeMask target = cands[static_cast<std::size_t>((chain + solves) % cands.size())];
      std::vector<int> fresh;
      unsigned used = 0;
      for (const LazyElement& e : tuple) used |= 1u << e.layer;
      for (int l = 0; l < 3; ++l)
        if (!(used >> l & 1)) fresh.push_back(l);
      int nl = fresh[static_cast<std::size_t>((chain * 5 + k) % fresh.size())];

      cpp_int beta = solve_extension(L, tuple, nl, target);
      ++solves;
      EXPECT_GE(beta, cpp_int(0));
      EXPECT_LT(beta, lad.product);
      cpp_int class_mod = assert_equations(subset_equations(L, tuple, nl, target), beta);
      tuple.push_back({nl, beta});
      ASSERT_EQ(L.type_of(tuple), target);
      cur = target;

      if (solves % 100 == 0 && beta + class_mod < lad.product) {
        std::vector<LazyElement> variant = tuple;
        variant.back().index = beta + class_mod;
        EXPECT_EQ(L.type_of(variant), target);
      }
    }
    ++chain;
  }
}

}  // namespace
