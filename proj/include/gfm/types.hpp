#pragma once

// Atomic k-types over a relational signature with constants.
//
// A k-type is a maximal consistent set of non-equality literals over the
// terms x1..xk, c1..cm; we store only the positive atoms, as a bitmask over
// the canonical atom enumeration.  The enumeration order is part of the
// interchange contract: relations in signature order, argument tuples in
// lexicographic order over the term alphabet x1 < ... < xk < c1 < ... < cm.
// Types are ordered by their bitmask value under this enumeration.

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace gfm {

using boost::multiprecision::cpp_int;
using TypeMask = std::uint64_t;

// One sorted vector of type masks per level 0..wd.
using FamilyLevels = std::vector<std::vector<TypeMask>>;

struct TypeSpaceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Relation {
  std::string name;
  int arity = 1;
  bool operator==(const Relation&) const = default;
};

struct Signature {
  std::vector<Relation> rels;
  std::vector<std::string> consts;

  int width() const {
    int w = 0;
    for (const auto& r : rels) w = std::max(w, r.arity);
    return w;
  }
  int rel_index(const std::string& name) const {
    for (std::size_t i = 0; i < rels.size(); ++i)
      if (rels[i].name == name) return static_cast<int>(i);
    return -1;
  }
  int const_index(const std::string& name) const {
    for (std::size_t i = 0; i < consts.size(); ++i)
      if (consts[i] == name) return static_cast<int>(i);
    return -1;
  }
  bool operator==(const Signature&) const = default;
};

inline void validate_signature(const Signature& sig) {
  if (sig.rels.empty()) throw std::invalid_argument("signature has no relation symbols");
  std::vector<std::string> names;
  for (const auto& r : sig.rels) {
    if (r.arity < 1) throw std::invalid_argument("relation arity must be >= 1: " + r.name);
    names.push_back(r.name);
  }
  for (const auto& c : sig.consts) names.push_back(c);
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw std::invalid_argument("duplicate symbol name in signature");
}

// Number of atoms at level k: sum over relations of (k + |Cons|)^arity.
// Throws when the total exceeds 64, the bitmask capacity.
inline int atom_count_checked(const Signature& sig, int k) {
  long long base = k + static_cast<long long>(sig.consts.size());
  long long total = 0;
  for (const auto& r : sig.rels) {
    long long tuples = 1;
    for (int i = 0; i < r.arity; ++i) {
      tuples *= base;
      if (tuples > 64) throw TypeSpaceError("atom table exceeds 64 atoms at level " + std::to_string(k));
    }
    total += tuples;
    if (total > 64) throw TypeSpaceError("atom table exceeds 64 atoms at level " + std::to_string(k));
  }
  return static_cast<int>(total);
}

// log2 of the number of k-types: sum over relations of (k + |Cons|)^arity,
// as an exact big integer.
inline cpp_int count_types_log2(const Signature& sig, int k) {
  cpp_int base = k + static_cast<long long>(sig.consts.size());
  cpp_int total = 0;
  for (const auto& r : sig.rels) {
    cpp_int tuples = 1;
    for (int i = 0; i < r.arity; ++i) tuples *= base;
    total += tuples;
  }
  return total;
}

// The number of k-types over sig: the product over relations of
// 2^{(k+|Cons|)^arity}.  Materialized as an exact big integer; refuses
// exponents beyond 10^6 bits (use count_types_log2 for those).
inline cpp_int count_types(const Signature& sig, int k) {
  cpp_int log2 = count_types_log2(sig, k);
  if (log2 > 1000000) throw TypeSpaceError("type count too large to materialize; use count_types_log2");
  return cpp_int(1) << static_cast<unsigned>(log2);
}

struct Atom {
  int rel = 0;                 // index into sig.rels
  std::vector<int> args;       // term ids: 0..k-1 are x1..xk, k+j is constant j
};

class AtomTable {
 public:
  static AtomTable make(const Signature& sig, int k) {
    AtomTable t;
    t.k_ = k;
    t.base_ = k + static_cast<int>(sig.consts.size());
    atom_count_checked(sig, k);
    for (std::size_t r = 0; r < sig.rels.size(); ++r) {
      t.rel_off_.push_back(static_cast<int>(t.atoms_.size()));
      if (t.base_ == 0) continue;  // no terms at level 0 without constants
      int ar = sig.rels[r].arity;
      std::vector<int> args(ar, 0);
      while (true) {
        t.atoms_.push_back(Atom{static_cast<int>(r), args});
        int i = ar - 1;
        while (i >= 0 && args[i] == t.base_ - 1) args[i--] = 0;
        if (i < 0) break;
        ++args[i];
      }
    }
    for (std::size_t i = 0; i < t.atoms_.size(); ++i) {
      std::uint64_t varset = 0;
      for (int a : t.atoms_[i].args)
        if (a < k) varset |= std::uint64_t(1) << a;
      std::uint64_t full = k == 0 ? 0 : (std::uint64_t(1) << k) - 1;
      if (varset == full) t.boundary_ |= std::uint64_t(1) << i;
    }
    return t;
  }

  int k() const { return k_; }
  int atom_count() const { return static_cast<int>(atoms_.size()); }
  const Atom& atom(int i) const { return atoms_[i]; }
  TypeMask boundary_mask() const { return boundary_; }

  // Index of the atom rel(args) in the canonical enumeration.
  int index_of(int rel, std::span<const int> args) const {
    long long idx = 0;
    for (int a : args) idx = idx * base_ + a;
    return rel_off_[rel] + static_cast<int>(idx);
  }

  std::string term_text(int term, const Signature& sig) const {
    if (term < k_) return "x" + std::to_string(term + 1);
    return sig.consts[term - k_];
  }
  std::string atom_text(int i, const Signature& sig) const {
    const Atom& a = atoms_[i];
    std::string s = sig.rels[a.rel].name + "(";
    for (std::size_t j = 0; j < a.args.size(); ++j) {
      if (j) s += ",";
      s += term_text(a.args[j], sig);
    }
    return s + ")";
  }

 private:
  int k_ = 0;
  int base_ = 0;
  std::vector<Atom> atoms_;
  std::vector<int> rel_off_;
  TypeMask boundary_ = 0;
};

inline TypeMask boundary_of(const AtomTable& t, TypeMask tau) { return tau & t.boundary_mask(); }
inline TypeMask interior_of(const AtomTable& t, TypeMask tau) { return tau & ~t.boundary_mask(); }

// A type is guarded when k <= 1 or some positive atom mentions all k variables.
inline bool is_guarded_type(const AtomTable& t, TypeMask tau) {
  return t.k() <= 1 || (tau & t.boundary_mask()) != 0;
}

// Types of equal arity are compatible when they agree outside the boundary.
inline bool compatible(const AtomTable& t, TypeMask a, TypeMask b) {
  return interior_of(t, a) == interior_of(t, b);
}

// For each atom of the sub-level table, its index in the k-level table under
// the selection idx: variable xj of the sub level becomes x_{idx[j]+1} of
// level k (0-based idx, distinct entries, values in [0,k)).
inline std::vector<int> reduct_map(const AtomTable& k_table, const AtomTable& sub_table,
                                   std::span<const int> idx) {
  if (static_cast<int>(idx.size()) != sub_table.k())
    throw std::invalid_argument("reduct_map: index count does not match sub-table arity");
  std::uint64_t seen = 0;
  for (int v : idx) {
    if (v < 0 || v >= k_table.k()) throw std::out_of_range("reduct index out of range");
    if (seen & (std::uint64_t(1) << v)) throw std::invalid_argument("reduct indices must be distinct");
    seen |= std::uint64_t(1) << v;
  }
  int l = sub_table.k();
  std::vector<int> map(sub_table.atom_count());
  std::vector<int> args;
  for (int i = 0; i < sub_table.atom_count(); ++i) {
    const Atom& a = sub_table.atom(i);
    args.clear();
    for (int t : a.args) args.push_back(t < l ? idx[t] : t - l + k_table.k());
    map[i] = k_table.index_of(a.rel, args);
  }
  return map;
}

inline TypeMask apply_reduct_map(const std::vector<int>& map, TypeMask tau) {
  TypeMask out = 0;
  for (std::size_t j = 0; j < map.size(); ++j)
    out |= ((tau >> map[j]) & 1u) << j;
  return out;
}

// The reduct tp^tau[x_{idx[0]+1}, ..., x_{idx[l-1]+1}]: atoms whose variables
// lie in the selected set, renamed by position.  Handles permutations when
// idx covers all of [0,k).
inline TypeMask reduct(const Signature& sig, const AtomTable& k_table, TypeMask tau,
                       std::span<const int> idx) {
  AtomTable sub = AtomTable::make(sig, static_cast<int>(idx.size()));
  return apply_reduct_map(reduct_map(k_table, sub, idx), tau);
}

// Atom tables for levels 0..wd, built once and shared.
struct TypeContext {
  Signature sig;
  int wd = 0;
  std::vector<AtomTable> tables;

  static TypeContext make(const Signature& sig, int wd) {
    validate_signature(sig);
    TypeContext cx;
    cx.sig = sig;
    cx.wd = wd;
    for (int k = 0; k <= wd; ++k) cx.tables.push_back(AtomTable::make(sig, k));
    return cx;
  }
  const AtomTable& at(int k) const { return tables.at(k); }
};

// Calls fn(mask) for every k-type in canonical (ascending mask) order.
// Requires the type count to fit the cap.
template <class F>
void enumerate_types(const AtomTable& t, std::uint64_t cap, F&& fn) {
  int bits = t.atom_count();
  if (bits > 63 || (std::uint64_t(1) << bits) > cap)
    throw TypeSpaceError("enumeration exceeds cap");
  std::uint64_t n = std::uint64_t(1) << bits;
  for (std::uint64_t m = 0; m < n; ++m) fn(static_cast<TypeMask>(m));
}

}  // namespace gfm
