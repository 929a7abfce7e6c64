#pragma once

// Satisfiability witnesses: one set of atomic types per arity level, jointly
// certifying that a normal-form sentence has a model.  A valid family is
// closed under reducts taken along any sequence of distinct indices, has
// exactly one 0-type, and is nonempty at every level.  It supports a sentence
// when universal conjuncts hold in every type, skolem demands extend inside
// the family, and existential conjuncts are realized by some type.
//
// Constants are treated as pairwise distinct here; sentences whose constants
// may coincide are handled upstream by the constant-merging case split.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gfm/normal_form.hpp"
#include "gfm/syntax.hpp"
#include "gfm/types.hpp"

namespace gfm {

struct Witness {
  Signature sig;
  int wd = 0;
  FamilyLevels levels;  // levels[k]: guarded or plain k-types, ascending masks
};

inline TypeContext witness_context(const Witness& w) {
  return TypeContext::make(w.sig, w.wd);
}

struct WitnessReport {
  bool closed = true;
  bool consistent = true;
  bool nonempty = true;
  bool all_guarded = true;
  bool universal_ok = true;
  bool skolem_ok = true;
  bool existential_ok = true;
  std::vector<std::string> problems;

  bool family_ok() const { return closed && consistent && nonempty; }
  bool ok() const { return family_ok() && universal_ok && skolem_ok && existential_ok; }

  void note(const std::string& p) {
    if (problems.size() < 64) problems.push_back(p);
  }
};

namespace detail {

struct TermEnv {
  std::vector<std::pair<std::string, int>> binds;

  int lookup(const std::string& name) const {
    for (auto it = binds.rbegin(); it != binds.rend(); ++it)
      if (it->first == name) return it->second;
    throw std::logic_error("unbound variable in type evaluation: " + name);
  }
};

inline int term_in_type(const AtomTable& t, const Signature& sig, const TermEnv& env,
                        const Term& term) {
  if (term.is_const) {
    int j = sig.const_index(term.name);
    if (j < 0) throw std::invalid_argument("constant not in witness signature: " + term.name);
    return t.k() + j;
  }
  return env.lookup(term.name);
}

// Truth of a quantifier-free formula in a type, under a variable-to-term map.
// Equality is decided by term identity: constants are pairwise distinct.
inline bool holds_in_type(const AtomTable& t, const Signature& sig, TypeMask tau,
                          const TermEnv& env, const Fml& f) {
  switch (f->kind) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Atom: {
      int rel = sig.rel_index(f->rel);
      if (rel < 0) throw std::invalid_argument("relation not in witness signature: " + f->rel);
      std::vector<int> ids;
      ids.reserve(f->args.size());
      for (const Term& a : f->args) ids.push_back(term_in_type(t, sig, env, a));
      return tau >> t.index_of(rel, ids) & 1;
    }
    case Kind::Eq:
      return term_in_type(t, sig, env, f->args[0]) == term_in_type(t, sig, env, f->args[1]);
    case Kind::Not: return !holds_in_type(t, sig, tau, env, f->a);
    case Kind::And:
      return holds_in_type(t, sig, tau, env, f->a) && holds_in_type(t, sig, tau, env, f->b);
    case Kind::Or:
      return holds_in_type(t, sig, tau, env, f->a) || holds_in_type(t, sig, tau, env, f->b);
    case Kind::Implies:
      return !holds_in_type(t, sig, tau, env, f->a) || holds_in_type(t, sig, tau, env, f->b);
    case Kind::Iff:
      return holds_in_type(t, sig, tau, env, f->a) == holds_in_type(t, sig, tau, env, f->b);
    case Kind::Exists:
    case Kind::Forall:
      throw std::logic_error("quantifier inside a conjunct matrix");
  }
  return false;
}

// Runs fn over every map from names into [0, nterms); fn returns false to
// stop.  Returns true when the enumeration completed.
template <typename Fn>
bool each_assignment(const std::vector<std::string>& names, int nterms, TermEnv& env, Fn&& fn) {
  if (nterms == 0 && !names.empty()) return true;
  std::size_t base = env.binds.size();
  for (const auto& n : names) env.binds.emplace_back(n, 0);
  bool completed = true;
  while (true) {
    if (!fn(static_cast<const TermEnv&>(env))) {
      completed = false;
      break;
    }
    std::size_t i = base + names.size();
    while (i > base) {
      int& slot = env.binds[i - 1].second;
      if (++slot < nterms) break;
      slot = 0;
      --i;
    }
    if (i == base) break;
  }
  env.binds.resize(base);
  return completed;
}

// The unnamed image of the assignment covers all k variables of the type.
inline bool spans_level(const TermEnv& env, int k) {
  std::uint64_t seen = 0;
  for (const auto& [name, id] : env.binds)
    if (id < k) seen |= std::uint64_t{1} << id;
  std::uint64_t want = k == 0 ? 0 : (std::uint64_t{1} << k) - 1;
  return seen == want;
}

inline std::string env_text(const AtomTable& t, const Signature& sig, const TermEnv& env) {
  std::string s;
  for (const auto& [name, id] : env.binds) {
    if (!s.empty()) s += ", ";
    s += name + "->" + t.term_text(id, sig);
  }
  return s;
}

inline std::string type_text(const AtomTable& t, const Signature& sig, TypeMask tau) {
  std::string s = "{";
  bool first = true;
  for (int i = 0; i < t.atom_count(); ++i)
    if (tau >> i & 1) {
      if (!first) s += ", ";
      s += t.atom_text(i, sig);
      first = false;
    }
  return s + "}";
}

// All sequences of distinct indices from [0,k), every length 0..k, every order.
template <typename Fn>
void each_index_sequence(int k, Fn&& fn) {
  std::vector<int> idx;
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  auto rec = [&](auto&& self) -> void {
    fn(idx);
    if (static_cast<int>(idx.size()) == k) return;
    for (int i = 0; i < k; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      used[static_cast<std::size_t>(i)] = true;
      idx.push_back(i);
      self(self);
      idx.pop_back();
      used[static_cast<std::size_t>(i)] = false;
    }
  };
  rec(rec);
}

inline bool family_has(const FamilyLevels& levels, int k, TypeMask tau) {
  const auto& lv = levels[static_cast<std::size_t>(k)];
  return std::binary_search(lv.begin(), lv.end(), tau);
}

inline bool universal_holds(const TypeContext& cx, int k, TypeMask tau, const Conjunct& c,
                            std::string* why) {
  if (static_cast<int>(c.xs.size()) < k) return true;
  const AtomTable& t = cx.at(k);
  int nterms = k + static_cast<int>(cx.sig.consts.size());
  TermEnv env;
  return each_assignment(c.xs, nterms, env, [&](const TermEnv& e) {
    if (!spans_level(e, k)) return true;
    if (!holds_in_type(t, cx.sig, tau, e, c.alpha)) return true;
    if (holds_in_type(t, cx.sig, tau, e, c.psi)) return true;
    if (why)
      *why = "level " + std::to_string(k) + " type " + type_text(t, cx.sig, tau) + " with " +
             env_text(t, cx.sig, e) + " satisfies the guard but not the matrix";
    return false;
  });
}

// Searches the family for a type extending tau on its first k coordinates
// together with an inner assignment making beta and psi true.
inline bool skolem_extends(const TypeContext& cx, const FamilyLevels& levels, int k, TypeMask tau,
                           const Conjunct& c, const TermEnv& base) {
  int consts = static_cast<int>(cx.sig.consts.size());
  std::vector<int> first_k(static_cast<std::size_t>(k));
  std::iota(first_k.begin(), first_k.end(), 0);
  for (int m = k; m <= cx.wd; ++m) {
    std::vector<int> rm = reduct_map(cx.at(m), cx.at(k), first_k);
    TermEnv shifted;
    for (const auto& [name, id] : base.binds)
      shifted.binds.emplace_back(name, id < k ? id : id - k + m);
    for (TypeMask big : levels[static_cast<std::size_t>(m)]) {
      if (apply_reduct_map(rm, big) != tau) continue;
      bool found = !each_assignment(c.ys, m + consts, shifted, [&](const TermEnv& e) {
        return !(holds_in_type(cx.at(m), cx.sig, big, e, c.beta) &&
                 holds_in_type(cx.at(m), cx.sig, big, e, c.psi));
      });
      if (found) return true;
    }
  }
  return false;
}

inline bool skolem_holds(const TypeContext& cx, const FamilyLevels& levels, int k, TypeMask tau,
                         const Conjunct& c, std::string* why) {
  if (static_cast<int>(c.xs.size()) < k) return true;
  const AtomTable& t = cx.at(k);
  int nterms = k + static_cast<int>(cx.sig.consts.size());
  TermEnv env;
  return each_assignment(c.xs, nterms, env, [&](const TermEnv& e) {
    if (!spans_level(e, k)) return true;
    if (!holds_in_type(t, cx.sig, tau, e, c.alpha)) return true;
    if (skolem_extends(cx, levels, k, tau, c, e)) return true;
    if (why)
      *why = "level " + std::to_string(k) + " type " + type_text(t, cx.sig, tau) + " with " +
             env_text(t, cx.sig, e) + " has no extension realizing the demand";
    return false;
  });
}

inline bool existential_realized(const TypeContext& cx, const FamilyLevels& levels,
                                 const Conjunct& c) {
  int consts = static_cast<int>(cx.sig.consts.size());
  for (int k = 0; k <= cx.wd; ++k) {
    const AtomTable& t = cx.at(k);
    for (TypeMask tau : levels[static_cast<std::size_t>(k)]) {
      TermEnv env;
      bool found = !each_assignment(c.xs, k + consts, env, [&](const TermEnv& e) {
        return !(holds_in_type(t, cx.sig, tau, e, c.alpha) &&
                 holds_in_type(t, cx.sig, tau, e, c.psi));
      });
      if (found) return true;
    }
  }
  return false;
}

inline void check_well_formed(const TypeContext& cx, const Witness& w) {
  if (static_cast<int>(w.levels.size()) != w.wd + 1)
    throw std::invalid_argument("witness must have one level per arity 0..wd");
  for (int k = 0; k <= w.wd; ++k) {
    const AtomTable& t = cx.at(k);
    int bits = t.atom_count();
    TypeMask full = bits >= 64 ? ~TypeMask{0} : (TypeMask{1} << bits) - 1;
    TypeMask prev = 0;
    bool first = true;
    for (TypeMask tau : w.levels[static_cast<std::size_t>(k)]) {
      if (tau & ~full)
        throw std::invalid_argument("type mask outside the atom range at level " +
                                    std::to_string(k));
      if (!first && tau <= prev)
        throw std::invalid_argument("types not in strictly ascending canonical order at level " +
                                    std::to_string(k));
      prev = tau;
      first = false;
    }
  }
}

}  // namespace detail

// Structural invariants: closure under reducts, a unique 0-type, nonempty
// levels.  Guardedness of every type is reported separately; families may
// legitimately contain unguarded types (densify removes them when needed).
inline WitnessReport validate(const Witness& w) {
  TypeContext cx = witness_context(w);
  detail::check_well_formed(cx, w);
  WitnessReport r;
  for (int k = 0; k <= w.wd; ++k) {
    if (w.levels[static_cast<std::size_t>(k)].empty()) {
      r.nonempty = false;
      r.note("level " + std::to_string(k) + " is empty");
    }
  }
  if (w.levels[0].size() != 1) {
    r.consistent = false;
    r.note("family has " + std::to_string(w.levels[0].size()) + " 0-types; exactly one required");
  }
  for (int k = 0; k <= w.wd; ++k) {
    const AtomTable& t = cx.at(k);
    for (TypeMask tau : w.levels[static_cast<std::size_t>(k)]) {
      if (!is_guarded_type(t, tau)) {
        if (r.all_guarded)
          r.note("level " + std::to_string(k) + " type " + detail::type_text(t, w.sig, tau) +
                 " is not guarded");
        r.all_guarded = false;
      }
      detail::each_index_sequence(k, [&](const std::vector<int>& idx) {
        int l = static_cast<int>(idx.size());
        if (l == k && std::is_sorted(idx.begin(), idx.end())) return;  // identity
        TypeMask sub = apply_reduct_map(reduct_map(t, cx.at(l), idx), tau);
        if (!detail::family_has(w.levels, l, sub)) {
          r.closed = false;
          std::string seq;
          for (int i : idx) seq += (seq.empty() ? "" : ",") + std::to_string(i + 1);
          r.note("level " + std::to_string(k) + " type " + detail::type_text(t, w.sig, tau) +
                 ": reduct [" + seq + "] missing from level " + std::to_string(l));
        }
      });
    }
  }
  return r;
}

// Obligation checks of the witness criterion against a normal-form sentence.
// Assumes the family already passed validate.
inline WitnessReport supports(const Witness& w, const NormalFormSentence& nf) {
  TypeContext cx = witness_context(w);
  detail::check_well_formed(cx, w);
  WitnessReport r;
  for (std::size_t ci = 0; ci < nf.conjuncts.size(); ++ci) {
    const Conjunct& c = nf.conjuncts[ci];
    std::string tag = "conjunct " + std::to_string(ci + 1) + ": ";
    switch (c.kind) {
      case ConjunctKind::Universal:
        for (int k = 0; k <= w.wd; ++k)
          for (TypeMask tau : w.levels[static_cast<std::size_t>(k)]) {
            std::string why;
            if (!detail::universal_holds(cx, k, tau, c, &why)) {
              r.universal_ok = false;
              r.note(tag + why);
            }
          }
        break;
      case ConjunctKind::Skolem:
        for (int k = 0; k <= w.wd; ++k)
          for (TypeMask tau : w.levels[static_cast<std::size_t>(k)]) {
            std::string why;
            if (!detail::skolem_holds(cx, w.levels, k, tau, c, &why)) {
              r.skolem_ok = false;
              r.note(tag + why);
            }
          }
        break;
      case ConjunctKind::Existential:
        if (!detail::existential_realized(cx, w.levels, c)) {
          r.existential_ok = false;
          r.note(tag + "no type realizes it");
        }
        break;
    }
  }
  return r;
}

struct ComputeOptions {
  std::uint64_t level_cap = std::uint64_t{1} << 20;  // per-level materialization bound
  int u_rel = -1;  // when >= 0: keep only types with every atom of this relation positive
};

// Greatest-fixpoint type elimination: start from every k-type satisfying the
// universal conjuncts, repeatedly delete types with a missing reduct or an
// unmet skolem demand, then branch over surviving 0-types in ascending order
// and accept the first branch whose existential conjuncts are realized.
inline std::optional<Witness> compute_witness(const NormalFormSentence& nf,
                                              const ComputeOptions& opt = {}) {
  int wd = nf.width();
  TypeContext cx = TypeContext::make(nf.sig, wd);
  FamilyLevels levels(static_cast<std::size_t>(wd) + 1);
  for (int k = 0; k <= wd; ++k) {
    const AtomTable& t = cx.at(k);
    TypeMask u_mask = 0;
    if (opt.u_rel >= 0)
      for (int i = 0; i < t.atom_count(); ++i)
        if (t.atom(i).rel == opt.u_rel) u_mask |= TypeMask{1} << i;
    enumerate_types(t, opt.level_cap, [&](TypeMask tau) {
      if ((tau & u_mask) != u_mask) return;
      for (const Conjunct& c : nf.conjuncts)
        if (c.kind == ConjunctKind::Universal && !detail::universal_holds(cx, k, tau, c, nullptr))
          return;
      levels[static_cast<std::size_t>(k)].push_back(tau);
    });
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (int k = 0; k <= wd; ++k) {
      const AtomTable& t = cx.at(k);
      std::vector<TypeMask> keep;
      for (TypeMask tau : levels[static_cast<std::size_t>(k)]) {
        bool alive = true;
        detail::each_index_sequence(k, [&](const std::vector<int>& idx) {
          if (!alive) return;
          int l = static_cast<int>(idx.size());
          if (l == k && std::is_sorted(idx.begin(), idx.end())) return;
          TypeMask sub = apply_reduct_map(reduct_map(t, cx.at(l), idx), tau);
          if (!detail::family_has(levels, l, sub)) alive = false;
        });
        for (const Conjunct& c : nf.conjuncts) {
          if (!alive) break;
          if (c.kind == ConjunctKind::Skolem && !detail::skolem_holds(cx, levels, k, tau, c, nullptr))
            alive = false;
        }
        if (alive) keep.push_back(tau);
      }
      if (keep.size() != levels[static_cast<std::size_t>(k)].size()) {
        levels[static_cast<std::size_t>(k)] = std::move(keep);
        changed = true;
      }
    }
  }

  for (TypeMask zero : levels[0]) {
    FamilyLevels branch(static_cast<std::size_t>(wd) + 1);
    bool viable = true;
    for (int k = 0; k <= wd && viable; ++k) {
      std::vector<int> rm = reduct_map(cx.at(k), cx.at(0), std::vector<int>{});
      for (TypeMask tau : levels[static_cast<std::size_t>(k)])
        if (apply_reduct_map(rm, tau) == zero)
          branch[static_cast<std::size_t>(k)].push_back(tau);
      if (branch[static_cast<std::size_t>(k)].empty()) viable = false;
    }
    if (!viable) continue;
    bool realized = true;
    for (const Conjunct& c : nf.conjuncts)
      if (c.kind == ConjunctKind::Existential && !detail::existential_realized(cx, branch, c)) {
        realized = false;
        break;
      }
    if (realized) return Witness{nf.sig, wd, std::move(branch)};
  }
  return std::nullopt;
}

// Dense-guard transform: a fresh relation G of arity wd, positive on every
// argument sequence in every type.  Makes all types guarded while preserving
// level sizes, closure, and support verdicts; the input sentence never
// mentions G.
inline Witness densify(const Witness& w) {
  if (w.wd < 1) throw std::invalid_argument("densify needs width at least 1");
  Signature sig2 = w.sig;
  std::string g = "G";
  for (int suffix = 0; sig2.rel_index(g) >= 0 || sig2.const_index(g) >= 0; ++suffix)
    g = "G" + std::to_string(suffix);
  sig2.rels.push_back(Relation{g, w.wd});
  TypeContext cx1 = witness_context(w);
  TypeContext cx2 = TypeContext::make(sig2, w.wd);
  Witness out{std::move(sig2), w.wd, FamilyLevels(static_cast<std::size_t>(w.wd) + 1)};
  for (int k = 0; k <= w.wd; ++k) {
    // G comes last in the signature, so the original atoms keep their indices
    // and the G atoms occupy the tail of the enumeration.
    int oldc = cx1.at(k).atom_count();
    int newc = cx2.at(k).atom_count();
    TypeMask extra = 0;
    for (int i = oldc; i < newc; ++i) extra |= TypeMask{1} << i;
    for (TypeMask tau : w.levels[static_cast<std::size_t>(k)])
      out.levels[static_cast<std::size_t>(k)].push_back(tau | extra);
  }
  return out;
}

struct PairCompleteness {
  bool complete = true;
  std::vector<std::pair<TypeMask, TypeMask>> missing;  // ordered 1-type pairs
};

// Every ordered pair of 1-types must have a connecting 2-type in the family.
inline PairCompleteness pair_complete(const Witness& w) {
  if (w.wd < 2) throw std::invalid_argument("pair completeness needs width at least 2");
  TypeContext cx = witness_context(w);
  detail::check_well_formed(cx, w);
  std::vector<int> rm0 = reduct_map(cx.at(2), cx.at(1), std::vector<int>{0});
  std::vector<int> rm1 = reduct_map(cx.at(2), cx.at(1), std::vector<int>{1});
  std::vector<std::pair<TypeMask, TypeMask>> have;
  for (TypeMask big : w.levels[2])
    have.emplace_back(apply_reduct_map(rm0, big), apply_reduct_map(rm1, big));
  std::sort(have.begin(), have.end());
  have.erase(std::unique(have.begin(), have.end()), have.end());
  PairCompleteness r;
  for (TypeMask a : w.levels[1])
    for (TypeMask b : w.levels[1])
      if (!std::binary_search(have.begin(), have.end(), std::make_pair(a, b)))
        r.missing.emplace_back(a, b);
  r.complete = r.missing.empty();
  return r;
}

// ---------------------------------------------------------------------------
// Interchange format
// ---------------------------------------------------------------------------

// # gfm-witness v1
// rel P/1, R/2.
// const c.
// wd 1
// level 0
// {}
// level 1
// {P(x1)}
// Types are listed in ascending canonical order, atoms within a type in
// ascending enumeration order; terms x1..xk name the type's variables.
inline void write_witness(std::ostream& os, const Witness& w) {
  TypeContext cx = witness_context(w);
  detail::check_well_formed(cx, w);
  for (const auto& c : w.sig.consts) {
    bool reserved = c.size() >= 2 && c[0] == 'x' &&
                    std::all_of(c.begin() + 1, c.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
    if (reserved)
      throw std::invalid_argument("constant name collides with variable terms: " + c);
  }
  os << "# gfm-witness v1\n";
  if (!w.sig.rels.empty()) {
    os << "rel ";
    for (std::size_t i = 0; i < w.sig.rels.size(); ++i) {
      if (i) os << ", ";
      os << w.sig.rels[i].name << "/" << w.sig.rels[i].arity;
    }
    os << ".\n";
  }
  if (!w.sig.consts.empty()) {
    os << "const ";
    for (std::size_t i = 0; i < w.sig.consts.size(); ++i) {
      if (i) os << ", ";
      os << w.sig.consts[i];
    }
    os << ".\n";
  }
  os << "wd " << w.wd << "\n";
  for (int k = 0; k <= w.wd; ++k) {
    os << "level " << k << "\n";
    for (TypeMask tau : w.levels[static_cast<std::size_t>(k)])
      os << detail::type_text(cx.at(k), w.sig, tau) << "\n";
  }
}

inline Witness read_witness(std::istream& is) {
  Witness w;
  std::string line;
  int lineno = 0;
  int level = -1;
  bool have_wd = false;
  std::optional<TypeContext> cx;
  TypeMask prev = 0;
  bool level_fresh = true;
  auto failure = [&](const std::string& msg) {
    return std::runtime_error("witness file line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    if (line[a] == '#') continue;
    std::size_t z = line.find_last_not_of(" \t\r");
    std::string body = line.substr(a, z - a + 1);
    if (body.rfind("rel ", 0) == 0 || body.rfind("const ", 0) == 0) {
      if (have_wd) throw failure("signature lines must precede the wd line");
      detail::Parser p(detail::lex(body), w.sig, false);
      p.parse_preamble();
      w.sig = p.sig();
      continue;
    }
    if (body.rfind("wd ", 0) == 0) {
      if (have_wd) throw failure("duplicate wd line");
      if (w.sig.rels.empty()) throw failure("wd line before any signature declaration");
      try {
        w.wd = std::stoi(body.substr(3));
      } catch (const std::exception&) {
        throw failure("bad width");
      }
      if (w.wd < 0 || w.wd > 62) throw failure("bad width");
      have_wd = true;
      cx = TypeContext::make(w.sig, w.wd);
      w.levels.assign(static_cast<std::size_t>(w.wd) + 1, {});
      continue;
    }
    if (body.rfind("level ", 0) == 0) {
      if (!have_wd) throw failure("level block before the wd line");
      int next = -1;
      try {
        next = std::stoi(body.substr(6));
      } catch (const std::exception&) {
        throw failure("bad level number");
      }
      if (next != level + 1) throw failure("levels must appear in order 0..wd");
      if (next > w.wd) throw failure("level beyond the declared width");
      level = next;
      prev = 0;
      level_fresh = true;
      continue;
    }
    if (body.front() == '{') {
      if (level < 0) throw failure("type line outside a level block");
      if (body.back() != '}') throw failure("unterminated type");
      const AtomTable& t = cx->at(level);
      TypeMask tau = 0;
      int prev_atom = -1;
      std::string interior = body.substr(1, body.size() - 2);
      auto toks = detail::lex(interior);
      std::size_t p = 0;
      auto expect = [&](detail::Tok kind, const char* what) {
        if (toks[p].type != kind) throw failure(std::string("expected ") + what);
        return toks[p++];
      };
      while (toks[p].type != detail::Tok::End) {
        auto name = expect(detail::Tok::Ident, "atom name");
        int rel = w.sig.rel_index(name.text);
        if (rel < 0) throw failure("unknown relation " + name.text);
        expect(detail::Tok::LP, "(");
        std::vector<int> ids;
        while (true) {
          auto term = expect(detail::Tok::Ident, "term");
          bool var = term.text.size() >= 2 && term.text[0] == 'x' &&
                     std::all_of(term.text.begin() + 1, term.text.end(),
                                 [](char ch) { return ch >= '0' && ch <= '9'; });
          if (var) {
            int i = std::stoi(term.text.substr(1));
            if (i < 1 || i > level) throw failure("variable " + term.text + " out of range");
            ids.push_back(i - 1);
          } else {
            int j = w.sig.const_index(term.text);
            if (j < 0) throw failure("unknown constant " + term.text);
            ids.push_back(level + j);
          }
          if (toks[p].type == detail::Tok::Comma) {
            ++p;
            continue;
          }
          break;
        }
        expect(detail::Tok::RP, ")");
        if (static_cast<int>(ids.size()) != w.sig.rels[static_cast<std::size_t>(rel)].arity)
          throw failure("arity mismatch on " + name.text);
        int ai = t.index_of(rel, ids);
        if (ai <= prev_atom) throw failure("atoms out of canonical order");
        prev_atom = ai;
        tau |= TypeMask{1} << ai;
        if (toks[p].type == detail::Tok::Comma) ++p;
      }
      if (!level_fresh && tau <= prev) throw failure("types out of canonical order");
      prev = tau;
      level_fresh = false;
      w.levels[static_cast<std::size_t>(level)].push_back(tau);
      continue;
    }
    throw failure("unrecognized line");
  }
  if (!have_wd) throw std::runtime_error("witness file: missing wd line");
  if (level != w.wd) throw std::runtime_error("witness file: missing level blocks");
  return w;
}

}  // namespace gfm
