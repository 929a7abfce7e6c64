#pragma once

// Tarskian evaluation of sentences over finite structures.  Two evaluators
// are provided: model_check walks guard facts at guarded quantifiers (the
// only feasible route when quantifier rank times domain size explodes), and
// model_check_flat enumerates assignments blindly, usable against any
// structure view that can answer atom queries.

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gfm/structure.hpp"
#include "gfm/syntax.hpp"

namespace gfm {

namespace detail {

struct EvalEnv {
  std::vector<std::pair<std::string, int>> binds;

  int lookup(const std::string& v) const {
    for (auto it = binds.rbegin(); it != binds.rend(); ++it)
      if (it->first == v) return it->second;
    throw std::logic_error("unbound variable in evaluation: " + v);
  }
  bool bound(const std::string& v) const {
    for (auto it = binds.rbegin(); it != binds.rend(); ++it)
      if (it->first == v) return true;
    return false;
  }
  void push(const std::string& v, int e) { binds.emplace_back(v, e); }
  void pop(std::size_t k) { binds.resize(binds.size() - k); }
};

template <class V>
int resolve_term(const V& s, const EvalEnv& env, const Term& t) {
  if (t.is_const) {
    int j = s.sig().const_index(t.name);
    if (j < 0) throw std::invalid_argument("constant outside structure signature: " + t.name);
    return s.const_elem(j);
  }
  return env.lookup(t.name);
}

template <class V>
bool eval_atom(const V& s, const EvalEnv& env, const Formula& f, std::vector<int>& scratch) {
  if (f.kind == Kind::Eq)
    return resolve_term(s, env, f.args[0]) == resolve_term(s, env, f.args[1]);
  int rel = s.sig().rel_index(f.rel);
  if (rel < 0) throw std::invalid_argument("relation outside structure signature: " + f.rel);
  scratch.clear();
  for (const Term& t : f.args) scratch.push_back(resolve_term(s, env, t));
  return s.holds(rel, scratch);
}

// ---------------------------------------------------------------------------
// Full-enumeration evaluator
// ---------------------------------------------------------------------------

template <class V>
bool eval_flat(const V& s, const std::vector<int>& domain, const Fml& f, EvalEnv& env,
               std::vector<int>& scratch);

template <class V>
bool eval_flat_quant(const V& s, const std::vector<int>& domain, const Fml& f, EvalEnv& env,
                     std::vector<int>& scratch, std::size_t vi) {
  bool exists = f->kind == Kind::Exists;
  if (vi == f->vars.size()) {
    if (!f->guard) return eval_flat(s, domain, f->body, env, scratch);
    bool g = eval_flat(s, domain, f->guard, env, scratch);
    if (exists) return g && eval_flat(s, domain, f->body, env, scratch);
    return !g || eval_flat(s, domain, f->body, env, scratch);
  }
  for (int e : domain) {
    env.push(f->vars[vi], e);
    bool b = eval_flat_quant(s, domain, f, env, scratch, vi + 1);
    env.pop(1);
    if (b == exists) return exists;
  }
  return !exists;
}

template <class V>
bool eval_flat(const V& s, const std::vector<int>& domain, const Fml& f, EvalEnv& env,
               std::vector<int>& scratch) {
  switch (f->kind) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Atom:
    case Kind::Eq: return eval_atom(s, env, *f, scratch);
    case Kind::Not: return !eval_flat(s, domain, f->a, env, scratch);
    case Kind::And:
      return eval_flat(s, domain, f->a, env, scratch) && eval_flat(s, domain, f->b, env, scratch);
    case Kind::Or:
      return eval_flat(s, domain, f->a, env, scratch) || eval_flat(s, domain, f->b, env, scratch);
    case Kind::Implies:
      return !eval_flat(s, domain, f->a, env, scratch) || eval_flat(s, domain, f->b, env, scratch);
    case Kind::Iff:
      return eval_flat(s, domain, f->a, env, scratch) == eval_flat(s, domain, f->b, env, scratch);
    case Kind::Exists:
    case Kind::Forall: return eval_flat_quant(s, domain, f, env, scratch, 0);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Guard-fact evaluator
// ---------------------------------------------------------------------------

// Fact orders built on demand for guard patterns whose fixed argument
// positions are not a prefix of the fact tuple: fact ids sorted by the
// values at those positions, keyed per relation and position set.
struct GuardIndex {
  std::map<std::pair<int, unsigned>, std::vector<std::uint32_t>> orders;
};

bool eval_fast(const FiniteStructure& s, const std::vector<int>& domain, const Fml& f,
               EvalEnv& env, GuardIndex& gi, std::vector<int>& scratch);

// Iterates assignments satisfying an atomic relation guard.  Guard
// positions holding constants or outer-bound variables are fixed before
// the scan, so on a finalized structure the matching facts form a run:
// of the lexicographically sorted fact list itself when the fixed
// positions are a leading prefix, of a sorted fact order from the index
// otherwise.  Only the remaining facts are visited; a repeated
// quantified variable stays a per-fact filter.  Visit returns false to
// stop early.
template <class Visit>
bool guard_matches(const FiniteStructure& s, const Fml& node, EvalEnv& env, GuardIndex& gi,
                   Visit&& visit) {
  const Formula& g = *node->guard;
  int rel = s.sig().rel_index(g.rel);
  if (rel < 0) throw std::invalid_argument("relation outside structure signature: " + g.rel);
  std::size_t cnt = s.fact_count(rel);
  std::size_t ar = g.args.size();

  unsigned fixed = 0;
  std::vector<int> fval(ar, 0);
  std::vector<char> quant(ar, 0);
  for (std::size_t p = 0; p < ar; ++p) {
    const Term& t = g.args[p];
    if (t.is_const) {
      fixed |= 1u << p;
      fval[p] = s.const_elem(s.sig().const_index(t.name));
      continue;
    }
    // A quantified variable binds fresh on first sight even when an outer
    // binding shadows the same name.
    for (const auto& v : node->vars) quant[p] |= v == t.name;
    if (!quant[p]) {
      fixed |= 1u << p;
      fval[p] = env.lookup(t.name);
    }
  }

  auto visit_fact = [&](std::size_t i) {
    std::span<const int> fact = s.fact(rel, i);
    std::size_t pushed = 0;
    bool ok = true;
    for (std::size_t p = 0; p < ar && ok; ++p) {
      int e = fact[p];
      if (!quant[p]) {
        ok = e == fval[p];
        continue;
      }
      bool locally_bound = false;
      for (std::size_t q = env.binds.size() - pushed; q < env.binds.size(); ++q)
        locally_bound |= env.binds[q].first == g.args[p].name;
      if (!locally_bound) {
        env.push(g.args[p].name, e);
        ++pushed;
      } else {
        ok = env.lookup(g.args[p].name) == e;
      }
    }
    bool keep_going = true;
    if (ok) keep_going = visit();
    env.pop(pushed);
    return keep_going;
  };

  if (fixed == 0 || !s.finalized()) {
    for (std::size_t i = 0; i < cnt; ++i)
      if (!visit_fact(i)) return false;
    return true;
  }

  unsigned pref = 0;
  while (pref < ar && (fixed >> pref & 1)) ++pref;
  if (fixed >> pref == 0) {
    // Binary search the first fact at or above the fixed prefix, then
    // walk the run of facts sharing it.
    std::size_t lo = 0, hi = cnt;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      std::span<const int> f = s.fact(rel, mid);
      int cmp = 0;
      for (unsigned p = 0; p < pref && cmp == 0; ++p)
        cmp = f[p] < fval[p] ? -1 : f[p] > fval[p] ? 1 : 0;
      if (cmp < 0) lo = mid + 1; else hi = mid;
    }
    for (std::size_t i = lo; i < cnt; ++i) {
      std::span<const int> f = s.fact(rel, i);
      bool same = true;
      for (unsigned p = 0; p < pref && same; ++p) same = f[p] == fval[p];
      if (!same) break;
      if (!visit_fact(i)) return false;
    }
    return true;
  }

  std::vector<int> fpos;
  for (std::size_t p = 0; p < ar; ++p)
    if (fixed >> p & 1) fpos.push_back(static_cast<int>(p));
  auto [it, fresh] = gi.orders.try_emplace({rel, fixed});
  std::vector<std::uint32_t>& ord = it->second;
  if (fresh) {
    ord.resize(cnt);
    for (std::size_t i = 0; i < cnt; ++i) ord[i] = static_cast<std::uint32_t>(i);
    std::sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
      std::span<const int> fa = s.fact(rel, a), fb = s.fact(rel, b);
      for (int p : fpos)
        if (fa[static_cast<std::size_t>(p)] != fb[static_cast<std::size_t>(p)])
          return fa[static_cast<std::size_t>(p)] < fb[static_cast<std::size_t>(p)];
      return a < b;
    });
  }
  std::size_t lo = 0, hi = cnt;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    std::span<const int> f = s.fact(rel, ord[mid]);
    int cmp = 0;
    for (int p : fpos) {
      int fv = f[static_cast<std::size_t>(p)], bv = fval[static_cast<std::size_t>(p)];
      if (fv != bv) {
        cmp = fv < bv ? -1 : 1;
        break;
      }
    }
    if (cmp < 0) lo = mid + 1; else hi = mid;
  }
  for (std::size_t i = lo; i < cnt; ++i) {
    std::span<const int> f = s.fact(rel, ord[i]);
    bool same = true;
    for (int p : fpos) same &= f[static_cast<std::size_t>(p)] == fval[static_cast<std::size_t>(p)];
    if (!same) break;
    if (!visit_fact(ord[i])) return false;
  }
  return true;
}

// Iterates assignments satisfying an equality guard.
template <class Visit>
bool eq_guard_matches(const FiniteStructure& s, const std::vector<int>& domain, const Fml& node,
                      EvalEnv& env, Visit&& visit) {
  const Formula& g = *node->guard;
  auto known = [&](const Term& t, int& val) {
    if (t.is_const) {
      val = s.const_elem(s.sig().const_index(t.name));
      return true;
    }
    for (const auto& v : node->vars)
      if (v == t.name) return false;
    val = env.lookup(t.name);
    return true;
  };
  int lv = 0, rv = 0;
  bool lk = known(g.args[0], lv), rk = known(g.args[1], rv);
  if (lk && rk) {
    // No quantified variable occurs in the guard, so the node could not have
    // been built in guarded form over a nonempty variable list.
    throw std::logic_error("equality guard without quantified variables");
  }
  if (lk || rk) {
    int val = lk ? lv : rv;
    const std::string& w = lk ? g.args[1].name : g.args[0].name;
    env.push(w, val);
    bool keep = visit();
    env.pop(1);
    return keep;
  }
  // Both sides are quantified variables.
  bool same = g.args[0].name == g.args[1].name;
  for (int e : domain) {
    env.push(g.args[0].name, e);
    if (!same) env.push(g.args[1].name, e);
    bool keep = visit();
    env.pop(same ? 1 : 2);
    if (!keep) return false;
  }
  return true;
}

template <class Visit>
bool quant_matches(const FiniteStructure& s, const std::vector<int>& domain, const Fml& f,
                   EvalEnv& env, GuardIndex& gi, Visit&& visit) {
  if (f->guard->kind == Kind::Atom) return guard_matches(s, f, env, gi, visit);
  return eq_guard_matches(s, domain, f, env, visit);
}

inline bool eval_fast(const FiniteStructure& s, const std::vector<int>& domain, const Fml& f,
                      EvalEnv& env, GuardIndex& gi, std::vector<int>& scratch) {
  switch (f->kind) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Atom:
    case Kind::Eq: return eval_atom(s, env, *f, scratch);
    case Kind::Not: return !eval_fast(s, domain, f->a, env, gi, scratch);
    case Kind::And:
      return eval_fast(s, domain, f->a, env, gi, scratch) &&
             eval_fast(s, domain, f->b, env, gi, scratch);
    case Kind::Or:
      return eval_fast(s, domain, f->a, env, gi, scratch) ||
             eval_fast(s, domain, f->b, env, gi, scratch);
    case Kind::Implies:
      return !eval_fast(s, domain, f->a, env, gi, scratch) ||
             eval_fast(s, domain, f->b, env, gi, scratch);
    case Kind::Iff:
      return eval_fast(s, domain, f->a, env, gi, scratch) ==
             eval_fast(s, domain, f->b, env, gi, scratch);
    case Kind::Exists:
    case Kind::Forall: {
      bool exists = f->kind == Kind::Exists;
      if (f->guard) {
        bool result = !exists;
        quant_matches(s, domain, f, env, gi, [&] {
          bool b = f->body->kind == Kind::True
                       ? true
                       : eval_fast(s, domain, f->body, env, gi, scratch);
          if (b == exists) {
            result = exists;
            return false;  // short-circuit
          }
          return true;
        });
        return result;
      }
      // Unguarded: enumerate assignments.
      struct Rec {
        const FiniteStructure& s;
        const std::vector<int>& domain;
        const Fml& f;
        EvalEnv& env;
        GuardIndex& gi;
        std::vector<int>& scratch;
        bool exists;
        bool run(std::size_t vi) {
          if (vi == f->vars.size()) return eval_fast(s, domain, f->body, env, gi, scratch);
          for (int e : domain) {
            env.push(f->vars[vi], e);
            bool b = run(vi + 1);
            env.pop(1);
            if (b == exists) return exists;
          }
          return !exists;
        }
      } rec{s, domain, f, env, gi, scratch, exists};
      return rec.run(0);
    }
  }
  return false;
}

}  // namespace detail

// Evaluates a sentence over a finite structure, iterating guard facts at
// guarded quantifiers and narrowing each scan to the facts matching the
// guard positions already determined.
inline bool model_check(const FiniteStructure& s, const Fml& sentence) {
  detail::EvalEnv env;
  detail::GuardIndex gi;
  std::vector<int> scratch;
  std::vector<int> domain = s.domain();
  return detail::eval_fast(s, domain, sentence, env, gi, scratch);
}

// Evaluates by full assignment enumeration against any structure view with
// sig(), const_elem(), holds(), and domain().
template <class V>
bool model_check_flat(const V& s, const Fml& sentence) {
  detail::EvalEnv env;
  std::vector<int> scratch;
  std::vector<int> domain = s.domain();
  return detail::eval_flat(s, domain, sentence, env, scratch);
}

// Index of the first conjunct the structure violates, or -1 when all hold.
// Guard fact orders are shared across the conjuncts.
inline int model_check_conjuncts(const FiniteStructure& s, const std::vector<Fml>& conjuncts) {
  detail::EvalEnv env;
  detail::GuardIndex gi;
  std::vector<int> scratch;
  std::vector<int> domain = s.domain();
  for (std::size_t i = 0; i < conjuncts.size(); ++i)
    if (!detail::eval_fast(s, domain, conjuncts[i], env, gi, scratch))
      return static_cast<int>(i);
  return -1;
}

}  // namespace gfm
