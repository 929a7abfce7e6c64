#pragma once

// Conversion of guarded sentences into normal form: a conjunction of
// existential conjuncts  exists xs (alpha & psi),  universal conjuncts
// forall xs (alpha -> psi),  and skolem conjuncts
// forall xs (alpha -> exists ys (beta & psi)),  with atomic guards and
// quantifier-free matrices.
//
// A sentence splits into finitely many cases first: a partition of its
// constants (which constants denote the same element) and a truth assignment
// to its closed proper quantified subformulas.  The sentence is satisfiable
// exactly when some case's normal form is.  Within a case, quantified
// subformulas are replaced bottom-up by fresh guard atoms over their free
// variables, with defining conjuncts appended.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gfm/structure.hpp"
#include "gfm/syntax.hpp"
#include "gfm/types.hpp"

namespace gfm {

enum class ConjunctKind { Existential, Universal, Skolem };

inline const char* conjunct_kind_name(ConjunctKind k) {
  switch (k) {
    case ConjunctKind::Existential: return "existential";
    case ConjunctKind::Universal: return "universal";
    case ConjunctKind::Skolem: return "skolem";
  }
  return "";
}

struct Conjunct {
  ConjunctKind kind = ConjunctKind::Existential;
  std::vector<std::string> xs;  // outer quantified variables (may be empty)
  std::vector<std::string> ys;  // inner existential variables (skolem only)
  Fml alpha;                    // outer guard; mk_true() when xs is empty
  Fml beta;                     // inner guard (skolem only)
  Fml psi;                      // quantifier-free matrix

  // Levels of the type family this conjunct constrains or demands.
  int width() const {
    int w = static_cast<int>(xs.size());
    if (kind == ConjunctKind::Skolem)
      w = std::max(w, static_cast<int>(fv(beta).size()));
    return w;
  }

  Fml to_formula() const {
    switch (kind) {
      case ConjunctKind::Existential: {
        Fml inner = psi->kind == Kind::True ? alpha
                    : alpha->kind == Kind::True ? psi
                                                : mk_and(alpha, psi);
        return xs.empty() ? inner : mk_exists(xs, inner);
      }
      case ConjunctKind::Universal:
        return mk_forall(xs, mk_implies(alpha, psi));
      case ConjunctKind::Skolem: {
        Fml inner = psi->kind == Kind::True ? beta : mk_and(beta, psi);
        return mk_forall(xs, mk_implies(alpha, mk_exists(ys, inner)));
      }
    }
    return nullptr;
  }
};

struct NormalFormSentence {
  Signature sig;
  std::vector<Conjunct> conjuncts;

  int width() const {
    int w = 0;
    for (const auto& c : conjuncts) w = std::max(w, c.width());
    return w;
  }

  Fml to_sentence() const {
    if (conjuncts.empty()) return mk_true();
    Fml acc = conjuncts[0].to_formula();
    for (std::size_t i = 1; i < conjuncts.size(); ++i)
      acc = mk_and(acc, conjuncts[i].to_formula());
    return acc;
  }
};

inline bool quantifier_free(const Fml& f) {
  if (f->kind == Kind::Exists || f->kind == Kind::Forall) return false;
  bool ok = true;
  if (f->a) ok = ok && quantifier_free(f->a);
  if (f->b) ok = ok && quantifier_free(f->b);
  return ok;
}

// Recognizes one normal-form conjunct; throws when the shape is wrong.
inline Conjunct conjunct_from(const Fml& f) {
  Conjunct c;
  if (quantifier_free(f)) {
    c.kind = ConjunctKind::Existential;
    c.alpha = mk_true();
    c.psi = f;
    return c;
  }
  if (f->kind == Kind::Exists && f->guard) {
    if (!quantifier_free(f->body))
      throw std::invalid_argument("existential conjunct has a quantified matrix");
    c.kind = ConjunctKind::Existential;
    c.xs = f->vars;
    c.alpha = f->guard;
    c.psi = f->body;
    return c;
  }
  if (f->kind == Kind::Forall && f->guard) {
    const Fml& b = f->body;
    if (b->kind == Kind::Exists && b->guard) {
      if (!quantifier_free(b->body))
        throw std::invalid_argument("skolem conjunct has a quantified matrix");
      c.kind = ConjunctKind::Skolem;
      c.xs = f->vars;
      c.alpha = f->guard;
      c.ys = b->vars;
      c.beta = b->guard;
      c.psi = b->body;
      return c;
    }
    if (!quantifier_free(b))
      throw std::invalid_argument("universal conjunct has a quantified matrix");
    c.kind = ConjunctKind::Universal;
    c.xs = f->vars;
    c.alpha = f->guard;
    c.psi = b;
    return c;
  }
  throw std::invalid_argument("formula is not a normal-form conjunct: " + print(f));
}

inline NormalFormSentence nf_from_sentence(const Fml& f, Signature sig) {
  NormalFormSentence nf;
  nf.sig = std::move(sig);
  std::vector<Fml> parts;
  flatten_and(f, parts);
  for (const Fml& p : parts) nf.conjuncts.push_back(conjunct_from(p));
  return nf;
}

// ---------------------------------------------------------------------------
// Case enumeration
// ---------------------------------------------------------------------------

// All partitions of {0..m-1} as restricted growth strings, finest first:
// sorted by descending block count, lexicographic within a count.  The
// identity partition comes first, the single-block partition last.
inline std::vector<std::vector<int>> partitions_of(int m) {
  std::vector<std::vector<int>> all;
  std::vector<int> rgs(static_cast<std::size_t>(m), 0);
  // Enumerate restricted growth strings in lexicographic order.
  while (true) {
    all.push_back(rgs);
    int i = m - 1;
    for (; i > 0; --i) {
      int prefix_max = 0;
      for (int j = 0; j < i; ++j) prefix_max = std::max(prefix_max, rgs[static_cast<std::size_t>(j)]);
      if (rgs[static_cast<std::size_t>(i)] <= prefix_max) break;
    }
    if (i <= 0) break;
    ++rgs[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j) rgs[static_cast<std::size_t>(j)] = 0;
  }
  if (m == 0) all = {std::vector<int>{}};
  auto blocks = [](const std::vector<int>& p) {
    int mx = -1;
    for (int b : p) mx = std::max(mx, b);
    return mx + 1;
  };
  std::stable_sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
    return blocks(a) > blocks(b);
  });
  return all;
}

struct CaseSplit {
  std::vector<int> partition;     // restricted growth string over the constants
  std::uint64_t assignment = 0;   // bit i: truth of the i-th closed proper
                                  // quantified subformula, in post-order
};

struct SplitNf {
  CaseSplit split;
  NormalFormSentence nf;
};

namespace detail {

inline Fml rename_constants(const Fml& f, const std::vector<std::string>& from,
                            const std::vector<std::string>& to) {
  auto fix = [&](const Term& t) {
    if (!t.is_const) return t;
    for (std::size_t j = 0; j < from.size(); ++j)
      if (from[j] == t.name) return Term{true, to[j]};
    return t;
  };
  switch (f->kind) {
    case Kind::True:
    case Kind::False:
      return f;
    case Kind::Atom: {
      std::vector<Term> args;
      for (const Term& t : f->args) args.push_back(fix(t));
      return mk_atom(f->rel, std::move(args));
    }
    case Kind::Eq:
      return mk_eq(fix(f->args[0]), fix(f->args[1]));
    case Kind::Not:
      return mk_not(rename_constants(f->a, from, to));
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
    case Kind::Iff:
      return mk_binary(f->kind, rename_constants(f->a, from, to),
                       rename_constants(f->b, from, to));
    case Kind::Exists:
    case Kind::Forall: {
      Fml body = rename_constants(f->body, from, to);
      if (f->guard) {
        Fml g = rename_constants(f->guard, from, to);
        return quant_node(f->kind, f->vars, g, body);
      }
      return quant_node(f->kind, f->vars, nullptr, body);
    }
  }
  return f;
}

inline int count_closed_proper(const Fml& f, bool root = true) {
  int n = 0;
  if (f->a) n += count_closed_proper(f->a, false);
  if (f->b) n += count_closed_proper(f->b, false);
  if (f->body) n += count_closed_proper(f->body, false);
  if (!root && (f->kind == Kind::Exists || f->kind == Kind::Forall) && fv(f).empty()) ++n;
  return n;
}

// Replaces each closed proper quantified subformula, in post-order, by the
// truth value its assignment bit dictates, collecting the (already inner-
// substituted) subformulas alongside their assigned values.
inline Fml substitute_closed(const Fml& f, std::uint64_t a, int& idx,
                             std::vector<std::pair<Fml, bool>>& appended, bool root) {
  switch (f->kind) {
    case Kind::True:
    case Kind::False:
    case Kind::Atom:
    case Kind::Eq:
      return f;
    case Kind::Not:
      return mk_not(substitute_closed(f->a, a, idx, appended, false));
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
    case Kind::Iff: {
      Fml lhs = substitute_closed(f->a, a, idx, appended, false);
      Fml rhs = substitute_closed(f->b, a, idx, appended, false);
      return mk_binary(f->kind, lhs, rhs);
    }
    case Kind::Exists:
    case Kind::Forall: {
      Fml body = substitute_closed(f->body, a, idx, appended, false);
      Fml rebuilt = quant_node(f->kind, f->vars, f->guard, body);
      if (!root && fv(f).empty()) {
        bool bit = a >> idx & 1;
        ++idx;
        appended.emplace_back(rebuilt, bit);
        return bit ? mk_true() : mk_false();
      }
      return rebuilt;
    }
  }
  return f;
}

inline Fml simplify(const Fml& f) {
  switch (f->kind) {
    case Kind::True:
    case Kind::False:
    case Kind::Atom:
    case Kind::Eq:
      return f;
    case Kind::Not: {
      Fml a = simplify(f->a);
      if (a->kind == Kind::True) return mk_false();
      if (a->kind == Kind::False) return mk_true();
      if (a->kind == Kind::Not) return a->a;
      return mk_not(a);
    }
    case Kind::And: {
      Fml a = simplify(f->a), b = simplify(f->b);
      if (a->kind == Kind::False || b->kind == Kind::False) return mk_false();
      if (a->kind == Kind::True) return b;
      if (b->kind == Kind::True) return a;
      return mk_and(a, b);
    }
    case Kind::Or: {
      Fml a = simplify(f->a), b = simplify(f->b);
      if (a->kind == Kind::True || b->kind == Kind::True) return mk_true();
      if (a->kind == Kind::False) return b;
      if (b->kind == Kind::False) return a;
      return mk_or(a, b);
    }
    case Kind::Implies: {
      Fml a = simplify(f->a), b = simplify(f->b);
      if (a->kind == Kind::False || b->kind == Kind::True) return mk_true();
      if (a->kind == Kind::True) return b;
      if (b->kind == Kind::False) return simplify(mk_not(a));
      return mk_implies(a, b);
    }
    case Kind::Iff: {
      Fml a = simplify(f->a), b = simplify(f->b);
      if (a->kind == Kind::True) return b;
      if (b->kind == Kind::True) return a;
      if (a->kind == Kind::False) return simplify(mk_not(b));
      if (b->kind == Kind::False) return simplify(mk_not(a));
      return mk_iff(a, b);
    }
    case Kind::Exists:
    case Kind::Forall: {
      Fml body = simplify(f->body);
      bool exists = f->kind == Kind::Exists;
      if (f->guard) {
        if (exists && body->kind == Kind::False) return mk_false();
        if (!exists && body->kind == Kind::True) return mk_true();
        if (exists)
          return mk_exists(f->vars, body->kind == Kind::True ? f->guard : mk_and(f->guard, body));
        return mk_forall(f->vars, mk_implies(f->guard, body));
      }
      // Domains are nonempty, so vacuous bodies decide the node.
      if (body->kind == Kind::True) return mk_true();
      if (body->kind == Kind::False) return mk_false();
      return exists ? mk_exists(f->vars, body) : mk_forall(f->vars, body);
    }
  }
  return f;
}

// Negation normal form; guards stay positive atoms on their own side.
inline Fml nnf(const Fml& f, bool neg) {
  switch (f->kind) {
    case Kind::True: return neg ? mk_false() : f;
    case Kind::False: return neg ? mk_true() : f;
    case Kind::Atom:
    case Kind::Eq:
      return neg ? mk_not(f) : f;
    case Kind::Not:
      return nnf(f->a, !neg);
    case Kind::And:
      return neg ? mk_or(nnf(f->a, true), nnf(f->b, true))
                 : mk_and(nnf(f->a, false), nnf(f->b, false));
    case Kind::Or:
      return neg ? mk_and(nnf(f->a, true), nnf(f->b, true))
                 : mk_or(nnf(f->a, false), nnf(f->b, false));
    case Kind::Implies:
      return neg ? mk_and(nnf(f->a, false), nnf(f->b, true))
                 : mk_or(nnf(f->a, true), nnf(f->b, false));
    case Kind::Iff:
      return neg ? mk_or(mk_and(nnf(f->a, false), nnf(f->b, true)),
                         mk_and(nnf(f->a, true), nnf(f->b, false)))
                 : mk_or(mk_and(nnf(f->a, false), nnf(f->b, false)),
                         mk_and(nnf(f->a, true), nnf(f->b, true)));
    case Kind::Exists:
    case Kind::Forall: {
      bool exists = (f->kind == Kind::Exists) != neg;
      if (f->guard) {
        Fml body = nnf(f->body, neg);
        if (exists)
          return mk_exists(f->vars, body->kind == Kind::True ? f->guard : mk_and(f->guard, body));
        return mk_forall(f->vars, mk_implies(f->guard, body));
      }
      Fml body = nnf(f->body, neg);
      return exists ? mk_exists(f->vars, body) : mk_forall(f->vars, body);
    }
  }
  return f;
}

// Replaces quantified subformulas by fresh guard atoms bottom-up, emitting
// defining conjuncts; fresh symbols are numbered in post-order.
struct NfAssembler {
  Signature sig;
  std::vector<Conjunct> conjuncts;
  int fresh_counter = 0;

  std::string fresh_rel(int arity) {
    while (true) {
      ++fresh_counter;
      std::string name = "R_chi_" + std::to_string(fresh_counter);
      if (sig.rel_index(name) < 0 && sig.const_index(name) < 0) {
        sig.rels.push_back(Relation{name, arity});
        return name;
      }
    }
  }

  Fml lift(const Fml& f) {
    switch (f->kind) {
      case Kind::True:
      case Kind::False:
      case Kind::Atom:
      case Kind::Eq:
        return f;
      case Kind::Not:
        return mk_not(lift(f->a));
      case Kind::And:
      case Kind::Or:
      case Kind::Implies:
      case Kind::Iff: {
        Fml lhs = lift(f->a);
        Fml rhs = lift(f->b);
        return mk_binary(f->kind, lhs, rhs);
      }
      case Kind::Exists:
      case Kind::Forall: {
        if (!f->guard)
          throw FragmentError("unguarded quantifier in normal-form conversion: " + print(f));
        std::set<std::string> zset = fv(f);
        if (zset.empty())
          throw std::logic_error("closed subformula survived the case split: " + print(f));
        std::vector<std::string> zs(zset.begin(), zset.end());
        Fml inner = lift(f->body);
        std::string name = fresh_rel(static_cast<int>(zs.size()));
        std::vector<Term> args;
        for (const auto& z : zs) args.push_back(Term{false, z});
        Fml atom = mk_atom(name, std::move(args));
        if (f->kind == Kind::Exists) {
          Conjunct c;
          c.kind = ConjunctKind::Skolem;
          c.xs = zs;
          c.alpha = atom;
          c.ys = f->vars;
          c.beta = f->guard;
          c.psi = inner;
          conjuncts.push_back(std::move(c));
        } else {
          std::set<std::string> gset = fv(f->guard);
          Conjunct c;
          c.kind = ConjunctKind::Universal;
          c.xs = std::vector<std::string>(gset.begin(), gset.end());
          c.alpha = f->guard;
          c.psi = mk_or(mk_not(atom), inner);
          conjuncts.push_back(std::move(c));
        }
        return atom;
      }
    }
    return f;
  }

  void top_conjunct(const Fml& f) {
    if (f->kind == Kind::True) return;
    if (quantifier_free(f)) {
      Conjunct c;
      c.kind = ConjunctKind::Existential;
      c.alpha = mk_true();
      c.psi = f;
      conjuncts.push_back(std::move(c));
      return;
    }
    if (f->kind == Kind::Exists && f->guard) {
      Conjunct c;
      c.kind = ConjunctKind::Existential;
      c.xs = f->vars;
      c.alpha = f->guard;
      c.psi = lift(f->body);
      conjuncts.push_back(std::move(c));
      return;
    }
    if (f->kind == Kind::Forall && f->guard) {
      const Fml& b = f->body;
      Conjunct c;
      c.xs = f->vars;
      c.alpha = f->guard;
      if (b->kind == Kind::Exists && b->guard) {
        c.kind = ConjunctKind::Skolem;
        c.ys = b->vars;
        c.beta = b->guard;
        c.psi = lift(b->body);
      } else {
        c.kind = ConjunctKind::Universal;
        c.psi = lift(b);
      }
      conjuncts.push_back(std::move(c));
      return;
    }
    throw FragmentError("unguarded top-level quantifier: " + print(f));
  }
};

}  // namespace detail

// Normal forms of all case splits, in case order: partitions finest first,
// assignments ascending.  The sentence is satisfiable over some domain iff
// one of the returned normal forms is.
inline std::vector<SplitNf> normalize(const Fml& sentence, const Signature& sig) {
  if (classify(sentence) != FragmentTag::GF)
    throw FragmentError("sentence is not guarded; normal forms exist for guarded sentences only");
  std::vector<SplitNf> out;
  int m = static_cast<int>(sig.consts.size());
  for (const auto& partition : partitions_of(m)) {
    // Representative of each block: the least constant index in it.
    int blocks = 0;
    for (int b : partition) blocks = std::max(blocks, b + 1);
    std::vector<std::string> rep_name(static_cast<std::size_t>(blocks));
    std::vector<std::string> renamed(static_cast<std::size_t>(m));
    Signature sig_c = sig;
    sig_c.consts.clear();
    for (int b = 0; b < blocks; ++b) {
      for (int j = 0; j < m; ++j)
        if (partition[static_cast<std::size_t>(j)] == b) {
          rep_name[static_cast<std::size_t>(b)] = sig.consts[static_cast<std::size_t>(j)];
          break;
        }
      sig_c.consts.push_back(rep_name[static_cast<std::size_t>(b)]);
    }
    for (int j = 0; j < m; ++j)
      renamed[static_cast<std::size_t>(j)] =
          rep_name[static_cast<std::size_t>(partition[static_cast<std::size_t>(j)])];
    Fml merged = detail::rename_constants(sentence, sig.consts, renamed);

    int q = detail::count_closed_proper(merged);
    if (q > 20)
      throw std::runtime_error("case split explosion: " + std::to_string(q) +
                               " closed quantified subformulas");
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << q); ++a) {
      int idx = 0;
      std::vector<std::pair<Fml, bool>> appended;
      Fml substituted = detail::substitute_closed(merged, a, idx, appended, true);
      std::vector<std::pair<Fml, bool>> pending;  // formula, negated?
      std::vector<Fml> roots;
      flatten_and(detail::simplify(substituted), roots);
      for (const Fml& r : roots) pending.emplace_back(r, false);
      for (const auto& [chi, bit] : appended) pending.emplace_back(chi, !bit);

      detail::NfAssembler asmbl;
      asmbl.sig = sig_c;
      bool falsum = false;
      for (const auto& [formula, negated] : pending) {
        Fml ready = detail::simplify(negated ? mk_not(formula) : formula);
        if (ready->kind == Kind::True) continue;
        if (ready->kind == Kind::False) {
          falsum = true;
          break;
        }
        std::vector<Fml> parts;
        flatten_and(detail::nnf(ready, false), parts);
        for (const Fml& p : parts) asmbl.top_conjunct(p);
      }
      NormalFormSentence nf;
      if (falsum) {
        nf.sig = sig_c;
        Conjunct c;
        c.kind = ConjunctKind::Existential;
        c.alpha = mk_true();
        c.psi = mk_false();
        nf.conjuncts.push_back(std::move(c));
      } else {
        nf.sig = asmbl.sig;
        nf.conjuncts = std::move(asmbl.conjuncts);
      }
      out.push_back(SplitNf{CaseSplit{partition, a}, std::move(nf)});
    }
  }
  return out;
}

// Restricts a model of a case's normal form to the original signature:
// fresh relations are dropped and merged constants become aliases of their
// block representative.
inline FiniteStructure reinterpret_model(const FiniteStructure& nf_model,
                                         const Signature& orig_sig,
                                         const std::vector<int>& partition) {
  const Signature& nf_sig = nf_model.sig();
  int n = nf_model.n();
  int m = static_cast<int>(orig_sig.consts.size());
  FiniteStructure out(orig_sig, n);
  // Element translation: unnamed ids stay, each normal-form constant maps to
  // the slot of the matching original constant name.
  std::vector<int> elem_map(static_cast<std::size_t>(n + static_cast<int>(nf_sig.consts.size())));
  for (int e = 0; e < n; ++e) elem_map[static_cast<std::size_t>(e)] = e;
  for (std::size_t b = 0; b < nf_sig.consts.size(); ++b) {
    int j = orig_sig.const_index(nf_sig.consts[b]);
    if (j < 0) throw std::invalid_argument("normal-form constant missing from original signature");
    elem_map[static_cast<std::size_t>(n) + b] = n + j;
  }
  // Alias merged constants onto their block representative.
  for (int j = 0; j < m; ++j) {
    int b = partition[static_cast<std::size_t>(j)];
    for (int i = 0; i < m; ++i)
      if (partition[static_cast<std::size_t>(i)] == b) {
        if (i != j) out.alias_constant(j, i);
        break;
      }
  }
  std::vector<int> tuple;
  for (std::size_t r = 0; r < nf_sig.rels.size(); ++r) {
    int orig_rel = orig_sig.rel_index(nf_sig.rels[r].name);
    if (orig_rel < 0) continue;  // fresh symbol, dropped
    for (std::size_t i = 0; i < nf_model.fact_count(static_cast<int>(r)); ++i) {
      std::span<const int> t = nf_model.fact(static_cast<int>(r), i);
      tuple.clear();
      for (int e : t) tuple.push_back(elem_map[static_cast<std::size_t>(e)]);
      out.add_fact(orig_rel, tuple);
    }
  }
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

// # gfm-nf v1
// rel R/2, R_chi_1/1.
// # kind: universal
// forall x y (R(x,y) -> R(y,x))
inline void write_nf(std::ostream& os, const NormalFormSentence& nf) {
  os << "# gfm-nf v1\n";
  if (!nf.sig.rels.empty()) {
    os << "rel ";
    for (std::size_t i = 0; i < nf.sig.rels.size(); ++i) {
      if (i) os << ", ";
      os << nf.sig.rels[i].name << "/" << nf.sig.rels[i].arity;
    }
    os << ".\n";
  }
  if (!nf.sig.consts.empty()) {
    os << "const ";
    for (std::size_t i = 0; i < nf.sig.consts.size(); ++i) {
      if (i) os << ", ";
      os << nf.sig.consts[i];
    }
    os << ".\n";
  }
  for (const auto& c : nf.conjuncts) {
    os << "# kind: " << conjunct_kind_name(c.kind) << "\n";
    os << print(c.to_formula()) << "\n";
  }
}

inline NormalFormSentence read_nf(std::istream& is) {
  NormalFormSentence nf;
  std::string line;
  std::optional<std::string> pending_kind;
  int lineno = 0;
  auto failure = [&](const std::string& msg) {
    return std::runtime_error("normal-form file line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    if (line[a] == '#') {
      const std::string marker = "# kind:";
      if (line.compare(a, marker.size(), marker) == 0) {
        std::string kind = line.substr(a + marker.size());
        std::size_t b = kind.find_first_not_of(" \t");
        std::size_t e = kind.find_last_not_of(" \t\r");
        if (b == std::string::npos) throw failure("empty kind marker");
        pending_kind = kind.substr(b, e - b + 1);
      }
      continue;
    }
    if (line.compare(a, 4, "rel ") == 0 || line.compare(a, 6, "const ") == 0) {
      detail::Parser p(detail::lex(line), nf.sig, false);
      p.parse_preamble();
      nf.sig = p.sig();
      continue;
    }
    Fml f = parse_formula(line, nf.sig);
    Conjunct c = conjunct_from(f);
    if (pending_kind && *pending_kind != conjunct_kind_name(c.kind))
      throw failure("conjunct is " + std::string(conjunct_kind_name(c.kind)) +
                    " but the marker says " + *pending_kind);
    pending_kind.reset();
    nf.conjuncts.push_back(std::move(c));
  }
  return nf;
}

}  // namespace gfm
