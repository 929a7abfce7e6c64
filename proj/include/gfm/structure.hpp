#pragma once

// Finite relational structures with named constants: fact storage, atomic
// type extraction, tuple-wise construction from type assignments, the
// family-guardedness and extension-property checks, duplication, kings,
// and a line-based file format.
//
// Element ids: 0..n-1 are unnamed, n+j is the home slot of constant j.
// Merged constants share a representative slot (the least constant index of
// the class); non-representative slots are not part of the domain.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfm/syntax.hpp"
#include "gfm/types.hpp"

namespace gfm {

class FiniteStructure {
 public:
  FiniteStructure() = default;
  FiniteStructure(Signature sig, int n) : sig_(std::move(sig)), n_(n) {
    validate_signature(sig_);
    if (n < 0) throw std::invalid_argument("negative domain size");
    const_elem_.resize(sig_.consts.size());
    for (std::size_t j = 0; j < const_elem_.size(); ++j)
      const_elem_[j] = n_ + static_cast<int>(j);
    facts_.resize(sig_.rels.size());
  }

  const Signature& sig() const { return sig_; }
  int n() const { return n_; }
  int const_elem(int j) const { return const_elem_[static_cast<std::size_t>(j)]; }

  // Points constant j at the element of constant k (merging them).
  void alias_constant(int j, int k) {
    const_elem_[static_cast<std::size_t>(j)] = const_elem_[static_cast<std::size_t>(k)];
  }

  // All valid element ids: unnamed elements, then constant representatives.
  std::vector<int> domain() const {
    std::vector<int> out;
    for (int e = 0; e < n_; ++e) out.push_back(e);
    for (std::size_t j = 0; j < const_elem_.size(); ++j)
      if (const_elem_[j] == n_ + static_cast<int>(j)) out.push_back(const_elem_[j]);
    return out;
  }

  std::string element_name(int e) const {
    if (e < n_) return std::to_string(e);
    return sig_.consts[static_cast<std::size_t>(e - n_)];
  }

  void add_fact(int rel, std::span<const int> tuple) {
    auto& v = facts_[static_cast<std::size_t>(rel)];
    v.insert(v.end(), tuple.begin(), tuple.end());
    finalized_ = false;
  }

  // Sorts each relation's tuples lexicographically and removes duplicates.
  void finalize() {
    for (std::size_t r = 0; r < facts_.size(); ++r) {
      int ar = sig_.rels[r].arity;
      auto& flat = facts_[r];
      std::size_t cnt = flat.size() / static_cast<std::size_t>(ar);
      std::vector<std::size_t> order(cnt);
      for (std::size_t i = 0; i < cnt; ++i) order[i] = i;
      auto tup = [&](std::size_t i) {
        return std::span<const int>(flat.data() + i * static_cast<std::size_t>(ar),
                                    static_cast<std::size_t>(ar));
      };
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto ta = tup(a), tb = tup(b);
        return std::lexicographical_compare(ta.begin(), ta.end(), tb.begin(), tb.end());
      });
      std::vector<int> out;
      out.reserve(flat.size());
      for (std::size_t i = 0; i < cnt; ++i) {
        auto t = tup(order[i]);
        if (!out.empty() &&
            std::equal(t.begin(), t.end(), out.end() - ar)) continue;
        out.insert(out.end(), t.begin(), t.end());
      }
      flat = std::move(out);
    }
    finalized_ = true;
  }

  std::size_t fact_count(int rel) const {
    return facts_[static_cast<std::size_t>(rel)].size() /
           static_cast<std::size_t>(sig_.rels[static_cast<std::size_t>(rel)].arity);
  }
  std::size_t fact_count() const {
    std::size_t total = 0;
    for (std::size_t r = 0; r < facts_.size(); ++r) total += fact_count(static_cast<int>(r));
    return total;
  }
  std::span<const int> fact(int rel, std::size_t i) const {
    int ar = sig_.rels[static_cast<std::size_t>(rel)].arity;
    return std::span<const int>(
        facts_[static_cast<std::size_t>(rel)].data() + i * static_cast<std::size_t>(ar),
        static_cast<std::size_t>(ar));
  }

  bool finalized() const { return finalized_; }

  bool holds(int rel, std::span<const int> tuple) const {
    if (!finalized_) throw std::logic_error("structure queried before finalize()");
    int ar = sig_.rels[static_cast<std::size_t>(rel)].arity;
    const auto& flat = facts_[static_cast<std::size_t>(rel)];
    std::size_t lo = 0, hi = flat.size() / static_cast<std::size_t>(ar);
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      const int* t = flat.data() + mid * static_cast<std::size_t>(ar);
      int cmp = 0;
      for (int i = 0; i < ar; ++i) {
        if (t[i] != tuple[static_cast<std::size_t>(i)]) {
          cmp = t[i] < tuple[static_cast<std::size_t>(i)] ? -1 : 1;
          break;
        }
      }
      if (cmp == 0) return true;
      if (cmp < 0) lo = mid + 1; else hi = mid;
    }
    return false;
  }

  // Atomic type of a tuple of distinct unnamed elements (any order; the i-th
  // tuple element plays the i-th variable).  The empty tuple gives the type
  // of the constants.
  TypeMask type_of(const AtomTable& table, std::span<const int> tuple) const {
    int k = table.k();
    if (static_cast<int>(tuple.size()) != k)
      throw std::invalid_argument("tuple length does not match table level");
    std::vector<int> args;
    TypeMask mask = 0;
    for (int a = 0; a < table.atom_count(); ++a) {
      const Atom& atom = table.atom(a);
      args.clear();
      for (int t : atom.args)
        args.push_back(t < k ? tuple[static_cast<std::size_t>(t)]
                             : const_elem_[static_cast<std::size_t>(t - k)]);
      if (holds(atom.rel, args)) mask |= TypeMask{1} << a;
    }
    return mask;
  }

 private:
  Signature sig_;
  int n_ = 0;
  std::vector<int> const_elem_;
  std::vector<std::vector<int>> facts_;  // per relation, flat tuples
  bool finalized_ = true;
};

// ---------------------------------------------------------------------------
// Tuple-wise construction from type assignments
// ---------------------------------------------------------------------------

// Assembles a structure by assigning full atomic types to tuples, writing
// only each type's boundary atoms as facts.  Assignments must proceed by
// ascending level (the empty tuple first); then a successful assignment is
// exact: the finished structure realizes precisely the assigned type.
class StructureBuilder {
 public:
  StructureBuilder(const TypeContext& cx, int n) : cx_(cx), s_(cx.sig, n) { s_.finalize(); }

  FiniteStructure& structure() { return s_; }

  // Merges constant j into constant k before any assignment.
  void alias_constant(int j, int k) { s_.alias_constant(j, k); }

  // Returns false (and writes nothing) when the type disagrees with already
  // placed facts on its interior atoms.
  bool assign(std::span<const int> tuple, TypeMask type) {
    int k = static_cast<int>(tuple.size());
    const AtomTable& table = cx_.at(k);
    TypeMask full = table.atom_count() >= 64 ? ~TypeMask{0}
                                             : (TypeMask{1} << table.atom_count()) - 1;
    TypeMask interior = full & ~table.boundary_mask();
    TypeMask current = s_.type_of(table, tuple);
    if ((current & interior) != (type & interior)) return false;
    TypeMask boundary = table.boundary_mask() & type;
    std::vector<int> args;
    for (int a = 0; a < table.atom_count(); ++a) {
      if (!(boundary >> a & 1)) continue;
      const Atom& atom = table.atom(a);
      args.clear();
      for (int t : atom.args)
        args.push_back(t < k ? tuple[static_cast<std::size_t>(t)] : s_.const_elem(t - k));
      s_.add_fact(atom.rel, args);
    }
    s_.finalize();
    return true;
  }

  FiniteStructure finish() {
    s_.finalize();
    return std::move(s_);
  }

 private:
  const TypeContext& cx_;
  FiniteStructure s_;
};

// ---------------------------------------------------------------------------
// Family checks
// ---------------------------------------------------------------------------

struct CheckReport {
  bool ok = true;
  long long tuples_checked = 0;
  std::string first_violation;

  void violate(std::string msg) {
    if (ok) {
      ok = false;
      first_violation = std::move(msg);
    }
  }
};

namespace detail {

inline std::string tuple_text(std::span<const int> t) {
  std::string out = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(t[i]);
  }
  return out + ")";
}

// Visits all strictly increasing k-tuples over [0, n).
template <class Fn>
void for_increasing_tuples(int n, int k, Fn&& fn) {
  std::vector<int> t(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) t[static_cast<std::size_t>(i)] = i;
  if (k > n) return;
  while (true) {
    fn(std::span<const int>(t));
    int i = k - 1;
    while (i >= 0 && t[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++t[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      t[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(j - 1)] + 1;
  }
}

inline bool family_contains(const std::vector<TypeMask>& level, TypeMask m) {
  return std::binary_search(level.begin(), level.end(), m);
}

}  // namespace detail

// A structure is family-guarded when every tuple of distinct unnamed
// elements whose type is guarded, at every level up to the width, realizes
// a type from the family.  Tuples with unguarded types are unconstrained;
// no guarded formula can reach them through a guard atom.  TypeOf is
// called with (level, increasing tuple) and returns the mask.
template <class TypeOf>
CheckReport check_guarded(int n, const TypeContext& cx, const FamilyLevels& fam, TypeOf&& type_of) {
  CheckReport rep;
  for (int k = 0; k <= cx.wd && rep.ok; ++k) {
    const AtomTable& table = cx.at(k);
    detail::for_increasing_tuples(n, k, [&](std::span<const int> t) {
      if (!rep.ok) return;
      ++rep.tuples_checked;
      TypeMask m = type_of(k, t);
      if (!is_guarded_type(table, m)) return;
      if (!detail::family_contains(fam[static_cast<std::size_t>(k)], m))
        rep.violate("tuple " + detail::tuple_text(t) + " realizes a guarded type outside the family");
    });
  }
  return rep;
}

// The extension property: whenever an increasing k-tuple realizes a family
// type and a family (k+1)-type extends that type, some further element
// realizes the extension together with the tuple.
template <class TypeOf>
CheckReport check_extension(int n, const TypeContext& cx, const FamilyLevels& fam,
                            TypeOf&& type_of) {
  CheckReport rep;
  std::vector<int> ext;
  for (int k = 0; k + 1 <= cx.wd && rep.ok; ++k) {
    const AtomTable& big = cx.at(k + 1);
    const AtomTable& small = cx.at(k);
    std::vector<int> first_k(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) first_k[static_cast<std::size_t>(i)] = i;
    std::vector<int> down = reduct_map(big, small, first_k);
    detail::for_increasing_tuples(n, k, [&](std::span<const int> t) {
      if (!rep.ok) return;
      TypeMask base = type_of(k, t);
      if (!detail::family_contains(fam[static_cast<std::size_t>(k)], base)) return;
      for (TypeMask target : fam[static_cast<std::size_t>(k + 1)]) {
        if (apply_reduct_map(down, target) != base) continue;
        ++rep.tuples_checked;
        bool found = false;
        for (int b = 0; b < n && !found; ++b) {
          if (std::find(t.begin(), t.end(), b) != t.end()) continue;
          ext.assign(t.begin(), t.end());
          ext.push_back(b);
          if (type_of(k + 1, ext) == target) found = true;
        }
        if (!found)
          rep.violate("tuple " + detail::tuple_text(t) + " has no extension realizing one of its family types");
      }
    });
  }
  return rep;
}

// Collects the types realized by tuples of distinct elements at each level.
template <class TypeOf>
FamilyLevels realized_family(int n, const TypeContext& cx, TypeOf&& type_of) {
  FamilyLevels fam(static_cast<std::size_t>(cx.wd) + 1);
  for (int k = 0; k <= cx.wd; ++k) {
    auto& level = fam[static_cast<std::size_t>(k)];
    detail::for_increasing_tuples(n, k, [&](std::span<const int> t) {
      // Every ordering of the tuple realizes a type; the permuted variants
      // keep the family closed under reducts taken in any index order.
      std::vector<int> perm(t.begin(), t.end());
      do {
        level.push_back(type_of(k, perm));
      } while (std::next_permutation(perm.begin(), perm.end()));
    });
    std::sort(level.begin(), level.end());
    level.erase(std::unique(level.begin(), level.end()), level.end());
  }
  return fam;
}

// Adapter running the checks directly against a finite structure.
inline auto type_of_fn(const FiniteStructure& s, const TypeContext& cx) {
  return [&s, &cx](int k, std::span<const int> t) { return s.type_of(cx.at(k), t); };
}

// ---------------------------------------------------------------------------
// Kings and duplication
// ---------------------------------------------------------------------------

// Unnamed elements whose atomic 1-type no other unnamed element shares.
inline std::vector<int> kings(const FiniteStructure& s) {
  AtomTable t1 = AtomTable::make(s.sig(), 1);
  std::vector<TypeMask> types;
  for (int e = 0; e < s.n(); ++e) {
    int tuple[1] = {e};
    types.push_back(s.type_of(t1, std::span<const int>(tuple, 1)));
  }
  std::vector<int> out;
  for (int e = 0; e < s.n(); ++e) {
    bool unique = true;
    for (int f = 0; f < s.n() && unique; ++f)
      if (f != e && types[static_cast<std::size_t>(f)] == types[static_cast<std::size_t>(e)])
        unique = false;
    if (unique) out.push_back(e);
  }
  return out;
}

// Two-fold duplication: the domain becomes {0,1} x A, constants keep their
// first copy, and every fact spawns one copy per choice of indices.  The
// result satisfies the same equality-free sentences and has no kings.
inline FiniteStructure duplicate(const FiniteStructure& s) {
  int n = s.n();
  int m = static_cast<int>(s.sig().consts.size());
  // Representatives in slot order.
  std::vector<int> reps;
  for (int j = 0; j < m; ++j)
    if (s.const_elem(j) == n + j) reps.push_back(n + j);
  int n2 = 2 * n + static_cast<int>(reps.size());
  FiniteStructure out(s.sig(), n2);
  for (int j = 0; j < m; ++j)
    if (s.const_elem(j) != n + j) out.alias_constant(j, s.const_elem(j) - n);
  // map0: copy 0 of each old element; map1: copy 1.
  std::vector<int> map0(static_cast<std::size_t>(n + m), -1),
      map1(static_cast<std::size_t>(n + m), -1);
  for (int e = 0; e < n; ++e) {
    map0[static_cast<std::size_t>(e)] = e;
    map1[static_cast<std::size_t>(e)] = n + e;
  }
  for (std::size_t r = 0; r < reps.size(); ++r) {
    map0[static_cast<std::size_t>(reps[r])] = out.const_elem(reps[r] - n);
    map1[static_cast<std::size_t>(reps[r])] = 2 * n + static_cast<int>(r);
  }
  for (int j = 0; j < m; ++j)
    if (s.const_elem(j) != n + j) {
      map0[static_cast<std::size_t>(n + j)] = map0[static_cast<std::size_t>(s.const_elem(j))];
      map1[static_cast<std::size_t>(n + j)] = map1[static_cast<std::size_t>(s.const_elem(j))];
    }
  std::vector<int> copy;
  for (std::size_t r = 0; r < s.sig().rels.size(); ++r) {
    int rel = static_cast<int>(r);
    int ar = s.sig().rels[r].arity;
    for (std::size_t i = 0; i < s.fact_count(rel); ++i) {
      std::span<const int> t = s.fact(rel, i);
      for (std::uint32_t choice = 0; choice < (1u << ar); ++choice) {
        copy.clear();
        for (int p = 0; p < ar; ++p) {
          int e = t[static_cast<std::size_t>(p)];
          copy.push_back(choice >> p & 1 ? map1[static_cast<std::size_t>(e)]
                                         : map0[static_cast<std::size_t>(e)]);
        }
        out.add_fact(rel, copy);
      }
    }
  }
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

// # gfm-structure v1
// rel R/2, P/1.
// const c, d.
// n 3
// d = c
// R(0,1)
// P(c)
inline void write_structure(std::ostream& os, const FiniteStructure& s) {
  os << "# gfm-structure v1\n";
  const Signature& sig = s.sig();
  if (!sig.rels.empty()) {
    os << "rel ";
    for (std::size_t i = 0; i < sig.rels.size(); ++i) {
      if (i) os << ", ";
      os << sig.rels[i].name << "/" << sig.rels[i].arity;
    }
    os << ".\n";
  }
  if (!sig.consts.empty()) {
    os << "const ";
    for (std::size_t i = 0; i < sig.consts.size(); ++i) {
      if (i) os << ", ";
      os << sig.consts[i];
    }
    os << ".\n";
  }
  os << "n " << s.n() << "\n";
  for (std::size_t j = 0; j < sig.consts.size(); ++j)
    if (s.const_elem(static_cast<int>(j)) != s.n() + static_cast<int>(j))
      os << sig.consts[j] << " = "
         << sig.consts[static_cast<std::size_t>(s.const_elem(static_cast<int>(j)) - s.n())]
         << "\n";
  for (std::size_t r = 0; r < sig.rels.size(); ++r) {
    for (std::size_t i = 0; i < s.fact_count(static_cast<int>(r)); ++i) {
      std::span<const int> t = s.fact(static_cast<int>(r), i);
      os << sig.rels[r].name << "(";
      for (std::size_t p = 0; p < t.size(); ++p) {
        if (p) os << ",";
        os << s.element_name(t[p]);
      }
      os << ")\n";
    }
  }
}

inline FiniteStructure read_structure(std::istream& is) {
  std::string line;
  Signature sig;
  int n = -1;
  FiniteStructure s;
  bool have_structure = false;
  std::vector<int> tuple;
  int lineno = 0;
  auto failure = [&](const std::string& msg) {
    return std::runtime_error("structure file line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++lineno;
    std::string trimmed = line;
    std::size_t a = trimmed.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    if (trimmed[a] == '#') continue;
    auto toks = detail::lex(line);
    if (toks.empty() || toks[0].type == detail::Tok::End) continue;
    const auto& head = toks[0];
    if (head.type != detail::Tok::Ident) throw failure("unexpected token '" + head.text + "'");
    if (head.text == "rel" || head.text == "const") {
      std::size_t i = 1;
      bool consts = head.text == "const";
      while (i < toks.size() && toks[i].type == detail::Tok::Ident) {
        if (consts) {
          sig.consts.push_back(toks[i].text);
          ++i;
        } else {
          std::string name = toks[i].text;
          if (i + 2 >= toks.size() || toks[i + 1].type != detail::Tok::Slash ||
              toks[i + 2].type != detail::Tok::Number)
            throw failure("expected name/arity");
          sig.rels.push_back(Relation{name, std::stoi(toks[i + 2].text)});
          i += 3;
        }
        if (i < toks.size() && toks[i].type == detail::Tok::Comma) ++i;
      }
      continue;
    }
    if (head.text == "n") {
      if (toks.size() < 2 || toks[1].type != detail::Tok::Number)
        throw failure("expected a number after n");
      n = std::stoi(toks[1].text);
      s = FiniteStructure(sig, n);
      have_structure = true;
      continue;
    }
    if (!have_structure) throw failure("facts before the n header");
    if (toks.size() >= 3 && toks[1].type == detail::Tok::Eq) {
      int j = sig.const_index(head.text);
      int k = toks[2].type == detail::Tok::Ident ? sig.const_index(toks[2].text) : -1;
      if (j < 0 || k < 0) throw failure("alias between undeclared constants");
      s.alias_constant(j, k);
      continue;
    }
    int rel = sig.rel_index(head.text);
    if (rel < 0) throw failure("undeclared relation '" + head.text + "'");
    tuple.clear();
    std::size_t i = 1;
    if (i >= toks.size() || toks[i].type != detail::Tok::LP) throw failure("expected '('");
    ++i;
    while (i < toks.size() && toks[i].type != detail::Tok::RP) {
      if (toks[i].type == detail::Tok::Comma) { ++i; continue; }
      if (toks[i].type == detail::Tok::Number) {
        int e = std::stoi(toks[i].text);
        if (e < 0 || e >= n) throw failure("element id out of range");
        tuple.push_back(e);
      } else if (toks[i].type == detail::Tok::Ident) {
        int j = sig.const_index(toks[i].text);
        if (j < 0) throw failure("unknown constant '" + toks[i].text + "'");
        tuple.push_back(s.const_elem(j));
      } else {
        throw failure("bad term");
      }
      ++i;
    }
    if (static_cast<int>(tuple.size()) != sig.rels[static_cast<std::size_t>(rel)].arity)
      throw failure("arity mismatch in fact");
    s.add_fact(rel, tuple);
  }
  if (!have_structure) throw std::runtime_error("structure file has no n header");
  s.finalize();
  return s;
}

}  // namespace gfm
