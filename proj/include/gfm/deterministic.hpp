#pragma once

// Seedless model construction over a layered domain.
//
// The domain is wd layers of M elements each, where M is the product of
// one prime per nonempty set of layers.  A tuple whose elements occupy
// distinct layers hashes the sum of its within-layer indices by the prime
// of its layer set, takes the family type at that position in the level's
// ascending enumeration, and keeps it exactly when it is compatible with
// the types already fixed below; a tuple that shares a layer keeps every
// boundary atom negative.  The whole structure is therefore a pure
// function of the witness and the ladder, with no seed anywhere.
//
// Extension partners are computed rather than searched for.  A partner
// realizing a demanded type must satisfy one congruence per subset of the
// extended tuple that contains the new position, and those congruences
// have a common solution by the Chinese remainder theorem: their moduli
// are the distinct ladder primes, and every demanded hash position fits
// below each prime because the smallest prime already dominates every
// family level size.
//
// Types are evaluated lazily per tuple, with a bounded cache that never
// affects results.  materialize() evaluates every tuple's type into the
// flat arrays of a TypedStructure when the domain fits under the caps,
// mapping element (layer, index) to the id layer * M + index; the arrays
// answer type queries directly and export relation facts below a fact
// bound.
//
// Widths one and two accept any valid witness.  There a tuple sharing a
// layer is a full-width tuple, so it owes no extensions and its
// all-negative completion never has to sit in the family.  From width
// three on, repeated-layer pairs below the top level would owe
// extensions whose subset congruences collide on a shared prime, so
// every family type must be guarded, which keeps those completions out
// of the family; densify arranges exactly that.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <list>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "build.hpp"

namespace gfm {

// One prime per nonempty layer subset, addressed by the subset's bit
// pattern: primes[i - 1] serves the subset with pattern i.
struct PrimeLadder {
  std::vector<cpp_int> primes;  // strictly increasing, all prime
  cpp_int product;              // M, the per-layer domain size
  cpp_rational measured_c;      // wd * M relative to the count bound; set by find_primes
};

namespace detail {

// One round of the strong probable-prime test to base a; n odd, n > a.
inline bool strong_probable_prime(const cpp_int& n, const cpp_int& a) {
  cpp_int d = n - 1;
  unsigned r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  cpp_int x = powm(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (unsigned i = 1; i < r; ++i) {
    x = (x * x) % n;
    if (x == n - 1) return true;
  }
  return false;
}

// Exact below 2^40 (trial division) and below 3.3e24 (the fixed base set
// decides primality there); beyond that the same bases give a strong
// probable-prime verdict.  Deterministic in all ranges.
inline bool is_prime(const cpp_int& n) {
  static const int small[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};
  if (n < 2) return false;
  for (int p : small) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  if (n < (cpp_int(1) << 40)) {
    std::uint64_t v = n.convert_to<std::uint64_t>();
    for (std::uint64_t d = 43; d * d <= v; d += 2)
      if (v % d == 0) return false;
    return true;
  }
  for (int p : small)
    if (!strong_probable_prime(n, p)) return false;
  return true;
}

// Smallest prime at or above from.
inline cpp_int next_prime(cpp_int from) {
  if (from <= 2) return 2;
  if ((from & 1) == 0) ++from;
  while (!is_prime(from)) from += 2;
  return from;
}

}  // namespace detail

// Builds the ladder for a signature: 2^wd - 1 consecutive primes starting
// at the count of width-level types.  measured_c records how far wd * M
// stays under that count raised to 2^wd.
inline PrimeLadder find_primes(const Signature& sig) {
  validate_signature(sig);
  int wd = sig.width();
  cpp_int count = count_types(sig, wd);
  PrimeLadder lad;
  lad.product = 1;
  cpp_int p = detail::next_prime(count);
  for (int i = 0; i < (1 << wd) - 1; ++i) {
    lad.primes.push_back(p);
    lad.product *= p;
    p = detail::next_prime(p + 1);
  }
  lad.measured_c = cpp_rational(wd * lad.product, pow(count, 1u << wd));
  return lad;
}

// One element of the layered domain.
struct LazyElement {
  int layer = 0;
  cpp_int index;

  bool operator==(const LazyElement&) const = default;
};

// Fully evaluated layered structure: one family index per increasing
// tuple of distinct elements, in flat arrays.  Element pairs are ranked
// colexicographically, (a, b) with a < b at b * (b - 1) / 2 + a, one
// byte each; 0xff marks a pair kept at its all-negative boundary
// completion (shared layer or incompatible candidate), whose mask is
// rebuilt from the member types on demand.  A byte always suffices: the
// smallest ladder prime bounds every family level size, and any pair
// table within the materialization budget keeps that prime far below
// 255 because M is at least its cube.
class TypedStructure {
 public:
  static constexpr std::uint8_t unassigned = 0xff;

  TypedStructure(Witness w, std::vector<std::uint32_t> level1, std::vector<std::uint8_t> level2)
      : w_(std::move(w)),
        cx_(witness_context(w_)),
        n_(static_cast<int>(level1.size())),
        t1_(std::move(level1)),
        t2_(std::move(level2)) {
    if (w_.wd >= 2) {
      const AtomTable& a2 = cx_.at(2);
      const AtomTable& a1 = cx_.at(1);
      std::vector<int> left{0}, right{1}, exchange{1, 0};
      auto up_left = reduct_map(a2, a1, left);
      auto up_right = reduct_map(a2, a1, right);
      const auto& fam1 = w_.levels[1];
      lift_left_.resize(fam1.size());
      lift_right_.resize(fam1.size());
      for (std::size_t i = 0; i < fam1.size(); ++i) {
        lift_left_[i] = detail::lift_mask(up_left, fam1[i]);
        lift_right_[i] = detail::lift_mask(up_right, fam1[i]);
      }
      auto swap_map = reduct_map(a2, a2, exchange);
      const auto& fam2 = w_.levels[2];
      swapped_.resize(fam2.size());
      for (std::size_t i = 0; i < fam2.size(); ++i)
        swapped_[i] = apply_reduct_map(swap_map, fam2[i]);
    }
  }

  int n() const { return n_; }
  const Witness& witness() const { return w_; }
  const TypeContext& context() const { return cx_; }

  // Atomic type of a tuple of distinct unnamed elements, the i-th element
  // playing the i-th variable.
  TypeMask type_of(int k, std::span<const int> ids) const {
    if (k != static_cast<int>(ids.size()))
      throw std::invalid_argument("tuple length does not match the level");
    for (int e : ids)
      if (e < 0 || e >= n_) throw std::invalid_argument("element id out of range");
    if (k == 0) return w_.levels[0][0];
    if (k == 1) return w_.levels[1][t1_[static_cast<std::size_t>(ids[0])]];
    if (k != 2) throw std::invalid_argument("typed arrays stop at element pairs");
    int a = ids[0], b = ids[1];
    if (a == b) throw std::invalid_argument("tuple repeats an element");
    std::size_t lo = static_cast<std::size_t>(std::min(a, b));
    std::size_t hi = static_cast<std::size_t>(std::max(a, b));
    std::uint8_t i = t2_[hi * (hi - 1) / 2 + lo];
    if (i == unassigned)
      return lift_left_[t1_[static_cast<std::size_t>(a)]] |
             lift_right_[t1_[static_cast<std::size_t>(b)]];
    return a < b ? w_.levels[2][i] : swapped_[i];
  }

  // Adapter for the structure checks, which take (level, tuple) callables.
  auto type_fn() const {
    return [this](int k, std::span<const int> t) { return type_of(k, t); };
  }

  // Exports the structure as relation facts.  Fact lists grow with the
  // square of the domain, so the export refuses when the count passes
  // max_facts; type queries stay available on the arrays either way.
  FiniteStructure to_structure(std::uint64_t max_facts = 20000000) const {
    std::vector<std::vector<unsigned>> weight;
    for (std::size_t k = 0; k < w_.levels.size() && k <= 2; ++k) {
      TypeMask bd = cx_.at(static_cast<int>(k)).boundary_mask();
      std::vector<unsigned> row;
      for (TypeMask t : w_.levels[k]) row.push_back(static_cast<unsigned>(std::popcount(t & bd)));
      weight.push_back(std::move(row));
    }
    std::uint64_t count = weight[0][0];
    for (std::uint32_t i : t1_) count += weight[1][i];
    for (std::uint8_t i : t2_)
      if (i != unassigned) count += weight[2][i];
    if (count > max_facts)
      throw std::length_error("structure export needs " + std::to_string(count) +
                              " facts, above the bound; query the type arrays instead");

    FiniteStructure s(w_.sig, n_);
    std::vector<int> args;
    auto emit = [&](const AtomTable& t, TypeMask mask, std::span<const int> ids) {
      int k = t.k();
      for (int a = 0; a < t.atom_count(); ++a) {
        if (!(mask >> a & 1)) continue;
        const Atom& atom = t.atom(a);
        args.clear();
        for (int term : atom.args)
          args.push_back(term < k ? ids[static_cast<std::size_t>(term)]
                                  : s.const_elem(term - k));
        s.add_fact(atom.rel, args);
      }
    };
    emit(cx_.at(0), w_.levels[0][0], {});
    const AtomTable& a1 = cx_.at(1);
    for (int e = 0; e < n_; ++e) {
      TypeMask bd = w_.levels[1][t1_[static_cast<std::size_t>(e)]] & a1.boundary_mask();
      if (bd) emit(a1, bd, std::vector<int>{e});
    }
    if (w_.wd >= 2) {
      const AtomTable& a2 = cx_.at(2);
      std::vector<int> pair(2);
      std::size_t rank = 0;
      for (int b = 1; b < n_; ++b)
        for (int a = 0; a < b; ++a, ++rank) {
          std::uint8_t i = t2_[rank];
          if (i == unassigned) continue;
          TypeMask bd = w_.levels[2][i] & a2.boundary_mask();
          if (!bd) continue;
          pair[0] = a;
          pair[1] = b;
          emit(a2, bd, pair);
        }
    }
    s.finalize();
    return s;
  }

 private:
  Witness w_;
  TypeContext cx_;
  int n_ = 0;
  std::vector<std::uint32_t> t1_;
  std::vector<std::uint8_t> t2_;
  std::vector<TypeMask> lift_left_, lift_right_;  // level-1 family index to pair bits
  std::vector<TypeMask> swapped_;                 // level-2 family index, variables exchanged
};

class LazyStructure {
 public:
  LazyStructure(Witness w, PrimeLadder ladder, std::size_t cache_capacity = 4096)
      : w_(std::move(w)),
        ladder_(std::move(ladder)),
        cx_(witness_context(w_)),
        cache_cap_(cache_capacity) {
    WitnessReport r = validate(w_);
    if (!r.family_ok())
      throw std::invalid_argument(
          "deterministic build: witness fails closure or has no unique constant type");
    if (w_.wd >= 3 && !r.all_guarded)
      throw std::invalid_argument(
          "deterministic build: from width 3 every family type must be guarded; "
          "densify the witness first");
    if (static_cast<int>(ladder_.primes.size()) != (1 << w_.wd) - 1)
      throw std::invalid_argument(
          "deterministic build: the ladder needs one prime per nonempty layer subset");
    std::size_t top = 0;
    for (const auto& level : w_.levels) top = std::max(top, level.size());
    cpp_int prev = 1, prod = 1;
    for (const cpp_int& p : ladder_.primes) {
      if (p <= prev)
        throw std::invalid_argument("deterministic build: ladder primes must strictly increase");
      if (!detail::is_prime(p))
        throw std::invalid_argument("deterministic build: ladder contains a composite");
      prev = p;
      prod *= p;
    }
    if (prod != ladder_.product)
      throw std::invalid_argument("deterministic build: ladder product disagrees with its primes");
    if (!ladder_.primes.empty() && ladder_.primes.front() < top)
      throw std::invalid_argument(
          "deterministic build: the smallest prime must reach every family level size");
    facet_.resize(static_cast<std::size_t>(w_.wd) + 1);
    interior_.assign(static_cast<std::size_t>(w_.wd) + 1, 0);
    for (int m = 1; m <= w_.wd; ++m) {
      const AtomTable& t = cx_.at(m);
      interior_[static_cast<std::size_t>(m)] =
          detail::full_type_mask(t) & ~t.boundary_mask();
      for (int j = 0; j < m; ++j) {
        std::vector<int> idx;
        for (int i = 0; i < m; ++i)
          if (i != j) idx.push_back(i);
        facet_[static_cast<std::size_t>(m)].push_back(reduct_map(t, cx_.at(m - 1), idx));
      }
    }
  }

  // The cache holds iterators into its recency list, so copying would
  // leave them dangling; moving keeps them valid.
  LazyStructure(const LazyStructure&) = delete;
  LazyStructure& operator=(const LazyStructure&) = delete;
  LazyStructure(LazyStructure&&) = default;
  LazyStructure& operator=(LazyStructure&&) = default;

  const Witness& witness() const { return w_; }
  const PrimeLadder& ladder() const { return ladder_; }
  const TypeContext& context() const { return cx_; }
  int layers() const { return w_.wd; }
  const cpp_int& layer_size() const { return ladder_.product; }

  // Atomic type of a tuple of distinct elements, the i-th element playing
  // the i-th variable.  The empty tuple gives the constants' type.
  TypeMask type_of(std::span<const LazyElement> tuple) const {
    int k = static_cast<int>(tuple.size());
    if (k > w_.wd) throw std::invalid_argument("tuple longer than the signature width");
    std::vector<LazyElement> sorted(tuple.begin(), tuple.end());
    for (const LazyElement& e : sorted) {
      if (e.layer < 0 || e.layer >= w_.wd)
        throw std::invalid_argument("element layer out of range");
      if (e.index < 0 || e.index >= ladder_.product)
        throw std::invalid_argument("element index out of range");
    }
    std::vector<int> order(sorted.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const LazyElement &x = sorted[static_cast<std::size_t>(a)],
                        &y = sorted[static_cast<std::size_t>(b)];
      return x.layer != y.layer ? x.layer < y.layer : x.index < y.index;
    });
    std::vector<LazyElement> s;
    for (int i : order) s.push_back(sorted[static_cast<std::size_t>(i)]);
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i] == s[i - 1]) throw std::invalid_argument("tuple repeats an element");
    TypeMask mask = sorted_type(s);
    if (std::is_sorted(order.begin(), order.end())) return mask;
    // Re-express the type in the caller's variable order: caller variable
    // j is the order[j] smallest, so map x_j to that sorted position.
    std::vector<int> pos(order.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      pos[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    return apply_reduct_map(reduct_map(cx_.at(k), cx_.at(k), pos), mask);
  }

  // Evaluates every tuple's type into flat arrays when the unnamed
  // domain, wd * M elements, fits under the cap and the pair table fits
  // the memory budget.  A width of three or more always exceeds the pair
  // budget (M is then a product of seven primes), so the arrays never
  // need a level past the pairs.
  TypedStructure materialize(std::uint64_t cap = 1000000) const {
    cpp_int total = cpp_int(w_.wd) * ladder_.product;
    if (total > cap || total > (cpp_int(1) << 30))
      throw std::length_error("materialization needs " + total.str() +
                              " elements, above the cap; use lazy type queries instead");
    if (w_.wd >= 2) {
      cpp_int slots = total * (total - 1) / 2;
      if (slots > 200000000)
        throw std::length_error("materialization needs " + slots.str() +
                                " pair slots, above the memory budget; use lazy type queries "
                                "instead");
    }

    std::uint64_t m = ladder_.product.convert_to<std::uint64_t>();
    int n = static_cast<int>(w_.wd * m);
    std::vector<std::uint64_t> primes;
    for (const cpp_int& p : ladder_.primes)
      primes.push_back(p.convert_to<std::uint64_t>());

    const auto& fam1 = w_.levels[1];
    std::vector<std::uint32_t> t1(static_cast<std::size_t>(n));
    for (int layer = 0; layer < w_.wd; ++layer) {
      std::uint64_t p = primes[(1u << layer) - 1];
      for (std::uint64_t b = 0; b < m; ++b)
        t1[static_cast<std::size_t>(layer) * m + b] =
            static_cast<std::uint32_t>(b % p % fam1.size());
    }

    std::vector<std::uint8_t> t2;
    if (w_.wd >= 2) {
      const auto& fam2 = w_.levels[2];
      // Family index of each candidate's one-variable reducts; a
      // candidate is kept exactly when both match the members' assigned
      // types, the integer form of the interior compatibility test.
      const AtomTable& a2 = cx_.at(2);
      const AtomTable& a1 = cx_.at(1);
      auto index1 = [&](TypeMask mask) {
        auto it = std::lower_bound(fam1.begin(), fam1.end(), mask);
        if (it == fam1.end() || *it != mask)
          throw std::logic_error("materialize: family is not closed under reducts");
        return static_cast<std::uint32_t>(it - fam1.begin());
      };
      std::vector<int> left{0}, right{1};
      auto down_left = reduct_map(a2, a1, left);
      auto down_right = reduct_map(a2, a1, right);
      std::vector<std::uint32_t> red_left(fam2.size()), red_right(fam2.size());
      for (std::size_t i = 0; i < fam2.size(); ++i) {
        red_left[i] = index1(apply_reduct_map(down_left, fam2[i]));
        red_right[i] = index1(apply_reduct_map(down_right, fam2[i]));
      }
      t2.assign((static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1)) / 2,
                TypedStructure::unassigned);
      for (int la = 0; la < w_.wd; ++la)
        for (int lb = la + 1; lb < w_.wd; ++lb) {
          std::uint64_t p = primes[((1u << la) | (1u << lb)) - 1];
          std::vector<std::uint8_t> hmod(p);
          for (std::uint64_t v = 0; v < p; ++v)
            hmod[v] = static_cast<std::uint8_t>(v % fam2.size());
          const std::uint32_t* ta = t1.data() + static_cast<std::size_t>(la) * m;
          const std::uint32_t* tb = t1.data() + static_cast<std::size_t>(lb) * m;
          for (std::uint64_t bb = 0; bb < m; ++bb) {
            std::uint64_t b = static_cast<std::uint64_t>(lb) * m + bb;
            std::size_t base = static_cast<std::size_t>(b * (b - 1) / 2) +
                               static_cast<std::size_t>(la) * m;
            std::uint64_t r = bb % p;
            std::uint32_t tbv = tb[bb];
            for (std::uint64_t ba = 0; ba < m; ++ba) {
              std::uint8_t h = hmod[r];
              if (red_left[h] == ta[ba] && red_right[h] == tbv)
                t2[base + ba] = h;
              if (++r == p) r = 0;
            }
          }
        }
    }
    return TypedStructure(w_, std::move(t1), std::move(t2));
  }

 private:
  // Type of a tuple already sorted by (layer, index); recursion over the
  // facets collects the interior, then the layer set's hash picks the
  // candidate.  Results are memoized per subtuple in a bounded LRU map.
  TypeMask sorted_type(const std::vector<LazyElement>& s) const {
    if (s.empty()) return w_.levels[0][0];
    int k = static_cast<int>(s.size());
    std::string key;
    for (const LazyElement& e : s) {
      key += std::to_string(e.layer);
      key += ':';
      key += e.index.str();
      key += ';';
    }
    if (cache_cap_ > 0) {
      auto it = cache_.find(key);
      if (it != cache_.end()) {
        lru_.splice(lru_.begin(), lru_, it->second.second);
        return it->second.first;
      }
    }
    TypeMask cur = 0;
    std::vector<LazyElement> facet;
    for (int j = 0; j < k; ++j) {
      facet.clear();
      for (int i = 0; i < k; ++i)
        if (i != j) facet.push_back(s[static_cast<std::size_t>(i)]);
      cur |= detail::lift_mask(
          facet_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)],
          sorted_type(facet));
    }
    TypeMask out = cur;
    bool distinct = true;
    for (int i = 1; i < k; ++i)
      if (s[static_cast<std::size_t>(i)].layer == s[static_cast<std::size_t>(i - 1)].layer)
        distinct = false;
    if (distinct) {
      unsigned set = 0;
      cpp_int sum = 0;
      for (const LazyElement& e : s) {
        set |= 1u << e.layer;
        sum += e.index;
      }
      const auto& fam = w_.levels[static_cast<std::size_t>(k)];
      cpp_int h = (sum % ladder_.primes[set - 1]) % fam.size();
      TypeMask cand = fam[h.convert_to<std::size_t>()];
      if ((cand & interior_[static_cast<std::size_t>(k)]) == cur) out = cand;
    }
    if (cache_cap_ > 0) {
      lru_.push_front(key);
      cache_.emplace(std::move(key), std::make_pair(out, lru_.begin()));
      if (cache_.size() > cache_cap_) {
        cache_.erase(lru_.back());
        lru_.pop_back();
      }
    }
    return out;
  }

  Witness w_;
  PrimeLadder ladder_;
  TypeContext cx_;
  std::vector<std::vector<std::vector<int>>> facet_;  // [level][dropped position]
  std::vector<TypeMask> interior_;
  std::size_t cache_cap_;
  mutable std::list<std::string> lru_;
  mutable std::unordered_map<std::string, std::pair<TypeMask, std::list<std::string>::iterator>>
      cache_;
};

inline LazyStructure build_deterministic(const Witness& w, const PrimeLadder& ladder) {
  return LazyStructure(w, ladder);
}

// Index of a new element at new_layer realizing tau2 together with the
// tuple; tau2 speaks over the tuple's variables in order plus the new
// element as the last variable.  The returned index satisfies the hash
// congruence of every subset containing the new position, so the extended
// type is exactly tau2 whenever the tuple realizes the reduct of tau2.
inline cpp_int solve_extension(const LazyStructure& L, std::span<const LazyElement> tuple,
                               int new_layer, TypeMask tau2) {
  const Witness& w = L.witness();
  const TypeContext& cx = L.context();
  const PrimeLadder& lad = L.ladder();
  int k = static_cast<int>(tuple.size());
  if (k + 1 > w.wd)
    throw std::invalid_argument("solve_extension: extension exceeds the signature width");
  if (new_layer < 0 || new_layer >= w.wd)
    throw std::invalid_argument("solve_extension: new layer out of range");
  unsigned seen = 0;
  for (const LazyElement& e : tuple) {
    if (e.layer < 0 || e.layer >= w.wd)
      throw std::invalid_argument("solve_extension: element layer out of range");
    if (e.index < 0 || e.index >= lad.product)
      throw std::invalid_argument("solve_extension: element index out of range");
    if (seen >> e.layer & 1)
      throw std::invalid_argument("solve_extension: tuple layers must be distinct");
    seen |= 1u << e.layer;
  }
  if (seen >> new_layer & 1)
    throw std::invalid_argument("solve_extension: new layer must be fresh");

  // Sorted coordinates: position of each caller variable after ordering
  // the extended tuple by layer.
  std::vector<int> order(static_cast<std::size_t>(k) + 1);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  auto layer_at = [&](int i) {
    return i < k ? tuple[static_cast<std::size_t>(i)].layer : new_layer;
  };
  std::sort(order.begin(), order.end(), [&](int a, int b) { return layer_at(a) < layer_at(b); });
  std::vector<int> pos(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    pos[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
  // Express tau2 in layer order: sorted variable i is caller variable
  // order[i], so each sorted atom reads its value through order.
  TypeMask t2s = apply_reduct_map(reduct_map(cx.at(k + 1), cx.at(k + 1), order), tau2);
  const auto& top = w.levels[static_cast<std::size_t>(k) + 1];
  if (!std::binary_search(top.begin(), top.end(), t2s))
    throw std::invalid_argument("solve_extension: target type is not in the family");

  cpp_int x = 0, mod = 1;
  std::vector<int> members;  // sorted positions of the subset
  for (std::uint64_t sub = 0; sub < (std::uint64_t{1} << k); ++sub) {
    members.clear();
    for (int i = 0; i < k; ++i)
      if (sub >> i & 1) members.push_back(pos[static_cast<std::size_t>(i)]);
    members.push_back(pos[static_cast<std::size_t>(k)]);
    std::sort(members.begin(), members.end());
    int m = static_cast<int>(members.size());
    TypeMask red = apply_reduct_map(reduct_map(cx.at(k + 1), cx.at(m), members), t2s);
    const auto& fam = w.levels[static_cast<std::size_t>(m)];
    auto it = std::lower_bound(fam.begin(), fam.end(), red);
    if (it == fam.end() || *it != red)
      throw std::logic_error("solve_extension: family is not closed under reducts");
    cpp_int h = it - fam.begin();
    unsigned set = 1u << new_layer;
    cpp_int rest = 0;
    for (int i = 0; i < k; ++i)
      if (sub >> i & 1) {
        set |= 1u << tuple[static_cast<std::size_t>(i)].layer;
        rest += tuple[static_cast<std::size_t>(i)].index;
      }
    const cpp_int& p = lad.primes[set - 1];
    cpp_int a = ((h - rest) % p + p) % p;
    // Merge x = a (mod p) into the accumulated solution; mod is a product
    // of other ladder primes, hence invertible mod p.
    cpp_int diff = ((a - x) % p + p) % p;
    cpp_int inv = powm(mod % p, p - 2, p);
    cpp_int t = diff * inv % p;
    x += mod * t;
    mod *= p;
  }
  return x;
}

}  // namespace gfm
