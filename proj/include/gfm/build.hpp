#pragma once
// Randomized construction of finite models from satisfiability witnesses.
//
// Shared scheme: the domain is n unnamed elements plus one element per
// constant.  The constants receive the witness 0-type up front; then for
// each level k = 1..wd, every strictly increasing k-tuple of unnamed
// elements draws a full level-k type and keeps it exactly when it is
// compatible, meaning the drawn type agrees, on every atom that does not
// name the whole tuple, with the types already placed at lower levels.  A
// kept type contributes its boundary atoms (the atoms naming all k tuple
// components, possibly alongside constants) as facts, so distinct tuples
// never write the same atom; a tuple that keeps nothing leaves its boundary
// atoms negative.
//
// build_independent draws uniformly from the whole level and drops
// incompatible draws; build_markov draws uniformly from the compatible
// types and comes up empty only when no type is compatible.
//
// Each tuple draws from the stream child(level).child(colex rank), so the
// output is a pure function of (witness, n, seed) and any single draw can
// be re-derived externally without replaying the build.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "model_check.hpp"
#include "normal_form.hpp"
#include "random.hpp"
#include "structure.hpp"
#include "types.hpp"
#include "witness.hpp"

namespace gfm {

using boost::multiprecision::cpp_rational;

enum class BuildAlgo { Independent, Markov };

struct BuildStats {
  long long tuples = 0;    // increasing tuples visited at levels 1..wd
  long long accepted = 0;  // tuples whose drawn type was kept
};

// Full types as placed by a build: one vector per level, indexed by the
// colex rank of the strictly increasing tuple.  Level 0 holds the constants'
// type at rank 0.
using TypeAssignment = std::vector<std::vector<TypeMask>>;

namespace detail {

inline TypeMask full_type_mask(const AtomTable& t) {
  return t.atom_count() >= 64 ? ~TypeMask{0}
                              : (TypeMask{1} << t.atom_count()) - 1;
}

// Scatters a subtype mask into the parent table through a reduct map.
inline TypeMask lift_mask(const std::vector<int>& map, TypeMask sub) {
  TypeMask out = 0;
  for (std::size_t i = 0; i < map.size(); ++i)
    if (sub >> i & 1) out |= TypeMask{1} << map[i];
  return out;
}

inline void check_buildable(const Witness& w, int n) {
  if (n < 0) throw std::invalid_argument("build: n must be nonnegative");
  if (w.levels.size() != static_cast<std::size_t>(w.wd) + 1)
    throw std::invalid_argument("build: witness needs one type list per level");
  if (w.levels[0].size() != 1)
    throw std::invalid_argument("build: witness must fix a unique type for the constants");
  for (const auto& level : w.levels)
    if (level.empty())
      throw std::invalid_argument("build: witness has an empty level");
  unsigned __int128 tuples = 0;
  for (int k = 1; k <= w.wd; ++k) tuples += binom128(n, k);
  if (tuples > (static_cast<unsigned __int128>(1) << 25))
    throw std::length_error("build: tuple table would exceed the memory budget; lower n");
}

}  // namespace detail

inline FiniteStructure build_with(BuildAlgo algo, const Witness& w, int n,
                                  std::uint64_t seed,
                                  BuildStats* stats = nullptr,
                                  TypeAssignment* types = nullptr) {
  detail::check_buildable(w, n);
  TypeContext cx = witness_context(w);
  RandomSource root(seed);

  // assigned[k][colex rank] is the full type placed on that tuple.
  TypeAssignment assigned(w.levels.size());
  assigned[0] = {w.levels[0][0]};
  for (int k = 1; k <= w.wd; ++k)
    assigned[static_cast<std::size_t>(k)]
        .assign(static_cast<std::size_t>(detail::binom128(n, k)), 0);

  std::vector<TypeMask> compatible;
  std::vector<int> facet;
  for (int k = 1; k <= w.wd; ++k) {
    const AtomTable& table = cx.at(k);
    TypeMask interior = detail::full_type_mask(table) & ~table.boundary_mask();
    std::vector<std::vector<int>> facet_map(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      std::vector<int> idx;
      for (int i = 0; i < k; ++i)
        if (i != j) idx.push_back(i);
      facet_map[static_cast<std::size_t>(j)] = reduct_map(table, cx.at(k - 1), idx);
    }
    const std::vector<TypeMask>& fam = w.levels[static_cast<std::size_t>(k)];
    RandomSource level_rng = root.child(static_cast<std::uint64_t>(k));
    detail::for_increasing_tuples(n, k, [&](std::span<const int> t) {
      // The atoms fixed below the tuple: every proper sub-tuple lies inside
      // one of the k facets, so lifting the facets' full types recovers the
      // whole interior.
      TypeMask current = 0;
      for (int j = 0; j < k; ++j) {
        facet.clear();
        for (int i = 0; i < k; ++i)
          if (i != j) facet.push_back(t[static_cast<std::size_t>(i)]);
        current |= detail::lift_mask(
            facet_map[static_cast<std::size_t>(j)],
            assigned[static_cast<std::size_t>(k) - 1][colex_rank(facet)]);
      }
      std::uint64_t rank = colex_rank(t);
      RandomSource rng = level_rng.child(rank);
      TypeMask placed = current;
      bool kept = false;
      if (algo == BuildAlgo::Independent) {
        TypeMask draw = fam[rng.below(fam.size())];
        if ((draw & interior) == current) {
          placed = draw;
          kept = true;
        }
      } else {
        compatible.clear();
        for (TypeMask tau : fam)
          if ((tau & interior) == current) compatible.push_back(tau);
        if (!compatible.empty()) {
          placed = compatible[rng.below(compatible.size())];
          kept = true;
        }
      }
      assigned[static_cast<std::size_t>(k)][rank] = placed;
      if (stats) {
        ++stats->tuples;
        stats->accepted += kept ? 1 : 0;
      }
    });
  }

  FiniteStructure s(cx.sig, n);
  std::vector<int> args;
  for (int k = 0; k <= w.wd; ++k) {
    const AtomTable& table = cx.at(k);
    TypeMask boundary = table.boundary_mask();
    detail::for_increasing_tuples(n, k, [&](std::span<const int> t) {
      TypeMask mask =
          assigned[static_cast<std::size_t>(k)][colex_rank(t)] & boundary;
      for (int a = 0; a < table.atom_count(); ++a) {
        if (!(mask >> a & 1)) continue;
        const Atom& atom = table.atom(a);
        args.clear();
        for (int term : atom.args)
          args.push_back(term < k ? t[static_cast<std::size_t>(term)]
                                  : s.const_elem(term - k));
        s.add_fact(atom.rel, args);
      }
    });
  }
  s.finalize();
  if (types) *types = std::move(assigned);
  return s;
}

inline FiniteStructure build_independent(const Witness& w, int n, std::uint64_t seed,
                                         BuildStats* stats = nullptr) {
  return build_with(BuildAlgo::Independent, w, n, seed, stats);
}

inline FiniteStructure build_markov(const Witness& w, int n, std::uint64_t seed,
                                    BuildStats* stats = nullptr) {
  return build_with(BuildAlgo::Markov, w, n, seed, stats);
}

// ---------------------------------------------------------------------------
// Sample-size thresholds
// ---------------------------------------------------------------------------

// e^{-1} - ((t-1)/t)^t: the margin by which one level's type count bounds
// the next in wide signatures.  Positive, below 1/e, decreasing from t = 2.
inline double epsilon_t(int t) {
  if (t < 1) throw std::invalid_argument("epsilon_t: t must be positive");
  return std::exp(-1.0) - std::pow((t - 1.0) / t, static_cast<double>(t));
}

struct Thresholds {
  int family_size = 0;    // types in the witness, all levels combined
  bool short_circuit = false;
  std::string note;       // set when fewer than three types make sampling moot

  cpp_rational delta;     // chance one fixed extension step succeeds, independent draws
  cpp_rational delta1;    // the same chance under compatible-only draws
  cpp_rational delta1_floor;  // signature-level floor: |types(wd-1)| / |types(wd)|

  double k_independent = 0;   // K = 8 (1/density) (wd + ln family_size)
  double k_markov = 0;
  std::uint64_t n_independent = 0;  // ceil(K ln K)
  std::uint64_t n_markov = 0;
  std::uint64_t n_envelope_independent = 0;  // same bound with the leading 8 dropped
  std::uint64_t n_envelope_markov = 0;
};

namespace detail {

inline std::uint64_t sample_size(double k_value) {
  if (k_value <= 1.0) return 1;
  double v = k_value * std::log(k_value);
  if (!std::isfinite(v) || v >= 9e18)
    throw std::overflow_error("thresholds: sample bound exceeds 64 bits");
  return static_cast<std::uint64_t>(std::ceil(v));
}

}  // namespace detail

inline Thresholds thresholds(const Witness& w) {
  Thresholds th;
  for (const auto& level : w.levels)
    th.family_size += static_cast<int>(level.size());
  if (th.family_size < 3) {
    th.short_circuit = true;
    th.note = th.family_size <= 1
                  ? "family below three types: the constants alone carry a model"
                  : "family below three types: the constants plus one element carry a model";
    return th;
  }
  if (w.wd < 1)
    throw std::invalid_argument("thresholds: width-0 witness with several types");
  TypeContext cx = witness_context(w);

  cpp_int den = pow(cpp_int(th.family_size), 1u << (w.wd - 1));
  th.delta = cpp_rational(1, den);

  cpp_int den1 = 1;
  for (int k = 1; k <= w.wd; ++k) {
    std::vector<TypeMask> bounds;
    for (TypeMask tau : w.levels[static_cast<std::size_t>(k)])
      bounds.push_back(tau & cx.at(k).boundary_mask());
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
    unsigned reps = static_cast<unsigned>(detail::binom128(w.wd - 1, k - 1));
    den1 *= pow(cpp_int(bounds.size()), reps);
  }
  th.delta1 = cpp_rational(1, den1);
  th.delta1_floor =
      cpp_rational(count_types(w.sig, w.wd - 1), count_types(w.sig, w.wd));

  double lnfam = std::log(static_cast<double>(th.family_size));
  auto fill = [&](const cpp_rational& density, double& k_out, std::uint64_t& n_out,
                  std::uint64_t& envelope_out) {
    double inv = (cpp_rational(1) / density).convert_to<double>();
    k_out = 8.0 * inv * (w.wd + lnfam);
    n_out = detail::sample_size(k_out);
    envelope_out = detail::sample_size(k_out / 8.0);
  };
  fill(th.delta, th.k_independent, th.n_independent, th.n_envelope_independent);
  fill(th.delta1, th.k_markov, th.n_markov, th.n_envelope_markov);
  return th;
}

// ---------------------------------------------------------------------------
// Verification and trials
// ---------------------------------------------------------------------------

struct Certificate {
  bool guarded = false;    // every tuple's type lies in the witness
  bool extension = false;  // every demanded extension is realized
  bool sentence = false;   // the normal form holds in the structure
  std::string problem;
  bool ok() const { return guarded && extension && sentence; }
};

// Answers type queries from a build's own assignment instead of re-deriving
// masks from the fact lists, which takes microseconds per tuple.  Accepts
// any tuple of distinct elements: a non-increasing query ranks the sorted
// tuple and permutes the stored mask back into the caller's variable order.
// The context and assignment must outlive the returned callable.
inline auto assignment_fn(const TypeContext& cx, const TypeAssignment& a) {
  std::map<std::vector<int>, std::vector<int>> perm_maps;
  return [&cx, &a, perm_maps](int k, std::span<const int> t) mutable {
    const std::vector<TypeMask>& level = a.at(static_cast<std::size_t>(k));
    if (std::adjacent_find(t.begin(), t.end(), std::greater_equal<int>()) == t.end())
      return level.at(colex_rank(t));
    std::vector<int> sorted(t.begin(), t.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("assignment type query needs distinct elements");
    std::vector<int> perm(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
      perm[i] = static_cast<int>(
          std::lower_bound(sorted.begin(), sorted.end(), t[i]) - sorted.begin());
    auto it = perm_maps.find(perm);
    if (it == perm_maps.end())
      it = perm_maps.emplace(perm, reduct_map(cx.at(k), cx.at(k), perm)).first;
    return apply_reduct_map(it->second, level.at(colex_rank(sorted)));
  };
}

// Runs the two family checks and then the sentence itself.  When the build's
// type assignment is passed along, the family checks read it directly;
// otherwise every queried type is recovered from the facts.
inline Certificate certify(const FiniteStructure& s, const Witness& w,
                           const NormalFormSentence& nf,
                           const TypeAssignment* types = nullptr) {
  if (!(s.sig() == w.sig) || !(nf.sig == w.sig))
    throw std::invalid_argument("certify: structure, witness and sentence signatures differ");
  Certificate c;
  TypeContext cx = witness_context(w);
  CheckReport g;
  CheckReport e;
  auto run_family_checks = [&](auto&& ty) {
    g = check_guarded(s.n(), cx, w.levels, ty);
    if (g.ok) e = check_extension(s.n(), cx, w.levels, ty);
  };
  if (types)
    run_family_checks(assignment_fn(cx, *types));
  else
    run_family_checks(type_of_fn(s, cx));
  c.guarded = g.ok;
  if (!g.ok) {
    c.problem = g.first_violation;
    return c;
  }
  c.extension = e.ok;
  if (!e.ok) {
    c.problem = e.first_violation;
    return c;
  }
  std::vector<Fml> conjuncts;
  for (const Conjunct& cj : nf.conjuncts) conjuncts.push_back(cj.to_formula());
  int bad = model_check_conjuncts(s, conjuncts);
  c.sentence = bad < 0;
  if (bad >= 0)
    c.problem = "conjunct " + std::to_string(bad + 1) + " fails in the built structure";
  return c;
}

// Fraction of child-seeded builds that certify; trial t uses the seed
// child(t), so the estimate does not depend on trial order.
inline double estimate_success(const Witness& w, const NormalFormSentence& nf,
                               int n, int trials, std::uint64_t seed,
                               BuildAlgo algo) {
  if (trials <= 0)
    throw std::invalid_argument("estimate_success: trials must be positive");
  RandomSource root(seed);
  int pass = 0;
  TypeAssignment types;
  for (int t = 0; t < trials; ++t) {
    FiniteStructure s =
        build_with(algo, w, n, root.child(static_cast<std::uint64_t>(t)).seed(),
                   nullptr, &types);
    if (certify(s, w, nf, &types).ok()) ++pass;
  }
  return static_cast<double>(pass) / trials;
}

struct AutoBuildResult {
  bool ok = false;
  int n = 0;          // domain size built last (the successful one when ok)
  int attempts = 0;
  std::optional<FiniteStructure> structure;
};

// Doubling search: starts at an eighth of the theoretical sample size and
// doubles until a build certifies, the attempt budget runs out, or the next
// size would blow the tuple budget.
inline AutoBuildResult auto_build(const Witness& w, const NormalFormSentence& nf,
                                  std::uint64_t seed, BuildAlgo algo,
                                  int max_attempts = 10) {
  AutoBuildResult r;
  std::uint64_t n = 1;
  Thresholds th = thresholds(w);
  if (!th.short_circuit) {
    std::uint64_t target =
        algo == BuildAlgo::Independent ? th.n_independent : th.n_markov;
    n = std::max<std::uint64_t>(1, (target + 7) / 8);
  }
  RandomSource root(seed);
  TypeAssignment types;
  for (int a = 0; a < max_attempts; ++a) {
    r.n = static_cast<int>(n);
    FiniteStructure s(w.sig, 0);
    try {
      s = build_with(algo, w, static_cast<int>(n),
                     root.child(static_cast<std::uint64_t>(a)).seed(), nullptr,
                     &types);
    } catch (const std::length_error&) {
      break;
    }
    ++r.attempts;
    if (certify(s, w, nf, &types).ok()) {
      r.ok = true;
      r.structure = std::move(s);
      return r;
    }
    n *= 2;
  }
  return r;
}

}  // namespace gfm
