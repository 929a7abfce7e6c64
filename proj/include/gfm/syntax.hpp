#pragma once

// First-order abstract syntax with guard-aware quantifier nodes, the concrete
// grammar (parser + printer), fragment classification, signature extraction,
// and the uniform length measure.
//
// Grammar sketch:
//   file     := preamble* formula
//   preamble := "const" ident ("," ident)* "."  |  "rel" ident "/" nat ("," ident "/" nat)* "."
//   formula  := iff; iff := impl ("<->" impl)*; impl := or ("->" impl)?
//   or := and ("|" and)*; and := unary ("&" unary)*
//   unary    := "!" unary | quant | primary
//   quant    := ("forall" | "exists") ident+ (parenthesized | "!" unary | quant)
//   primary  := "(" formula ")" | "true" | "false" | ident "(" term,* ")" | term "=" term
// Lines starting with '#' are comments.  Identifiers in term position are
// constants when declared in a "const" preamble, else bound variables.

#include <cctype>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfm/types.hpp"

namespace gfm {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                           std::to_string(col_) + ")"),
        line(line_), col(col_) {}
};

struct FragmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Kind { True, False, Atom, Eq, Not, And, Or, Implies, Iff, Exists, Forall };

struct Formula;
using Fml = std::shared_ptr<const Formula>;

struct Term {
  bool is_const = false;
  std::string name;
  bool operator==(const Term&) const = default;
};

struct Formula {
  Kind kind = Kind::True;
  std::string rel;                 // Atom
  std::vector<Term> args;          // Atom arguments; Eq operands
  Fml a, b;                        // Not uses a; binary connectives use a, b
  std::vector<std::string> vars;   // quantifier variables
  Fml guard;                       // quantifiers: non-null means guarded form
  Fml body;
};

inline Fml mk_true() {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::True;
  return f;
}
inline Fml mk_false() {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::False;
  return f;
}

inline Fml mk_atom(std::string rel, std::vector<Term> args) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Atom;
  f->rel = std::move(rel);
  f->args = std::move(args);
  return f;
}

inline Fml mk_eq(Term l, Term r) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Eq;
  f->args = {std::move(l), std::move(r)};
  return f;
}

inline Fml mk_unary(Kind k, Fml a) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->a = std::move(a);
  return f;
}
inline Fml mk_not(Fml a) { return mk_unary(Kind::Not, std::move(a)); }

inline Fml mk_binary(Kind k, Fml a, Fml b) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->a = std::move(a);
  f->b = std::move(b);
  return f;
}
inline Fml mk_and(Fml a, Fml b) { return mk_binary(Kind::And, std::move(a), std::move(b)); }
inline Fml mk_or(Fml a, Fml b) { return mk_binary(Kind::Or, std::move(a), std::move(b)); }
inline Fml mk_implies(Fml a, Fml b) { return mk_binary(Kind::Implies, std::move(a), std::move(b)); }
inline Fml mk_iff(Fml a, Fml b) { return mk_binary(Kind::Iff, std::move(a), std::move(b)); }

inline void fv_into(const Fml& f, std::set<std::string>& out) {
  switch (f->kind) {
    case Kind::True:
    case Kind::False:
      return;
    case Kind::Atom:
    case Kind::Eq:
      for (const auto& t : f->args)
        if (!t.is_const) out.insert(t.name);
      return;
    case Kind::Not:
      fv_into(f->a, out);
      return;
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
    case Kind::Iff:
      fv_into(f->a, out);
      fv_into(f->b, out);
      return;
    case Kind::Exists:
    case Kind::Forall: {
      std::set<std::string> inner;
      if (f->guard) fv_into(f->guard, inner);
      fv_into(f->body, inner);
      for (const auto& v : f->vars) inner.erase(v);
      out.insert(inner.begin(), inner.end());
      return;
    }
  }
}

inline std::set<std::string> fv(const Fml& f) {
  std::set<std::string> out;
  fv_into(f, out);
  return out;
}

inline bool equal(const Fml& x, const Fml& y) {
  if (x == y) return true;
  if (!x || !y || x->kind != y->kind) return false;
  switch (x->kind) {
    case Kind::True:
    case Kind::False:
      return true;
    case Kind::Atom:
      return x->rel == y->rel && x->args == y->args;
    case Kind::Eq:
      return x->args == y->args;
    case Kind::Not:
      return equal(x->a, y->a);
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
    case Kind::Iff:
      return equal(x->a, y->a) && equal(x->b, y->b);
    case Kind::Exists:
    case Kind::Forall:
      if (x->vars != y->vars) return false;
      if (static_cast<bool>(x->guard) != static_cast<bool>(y->guard)) return false;
      if (x->guard && !equal(x->guard, y->guard)) return false;
      return equal(x->body, y->body);
  }
  return false;
}

inline bool is_atomic(const Fml& f) { return f->kind == Kind::Atom || f->kind == Kind::Eq; }

inline void flatten_and(const Fml& f, std::vector<Fml>& out) {
  if (f->kind == Kind::And) {
    flatten_and(f->a, out);
    flatten_and(f->b, out);
  } else {
    out.push_back(f);
  }
}

// Left-folded conjunction of parts, matching how the parser associates
// '&' chains; the empty list is true.
inline Fml conj_of(const std::vector<Fml>& parts, std::size_t from = 0) {
  if (from >= parts.size()) return mk_true();
  Fml acc = parts[from];
  for (std::size_t i = from + 1; i < parts.size(); ++i) acc = mk_and(acc, parts[i]);
  return acc;
}

namespace detail {
inline bool guard_covers(const Fml& g, const Fml& body, const std::vector<std::string>& vars) {
  std::set<std::string> gv = fv(g);
  for (const auto& v : vars)
    if (!gv.count(v)) return false;
  for (const auto& v : fv(body))
    if (!gv.count(v)) return false;
  return true;
}

inline Fml quant_node(Kind k, std::vector<std::string> vars, Fml guard, Fml body) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->vars = std::move(vars);
  f->guard = std::move(guard);
  f->body = std::move(body);
  return f;
}
}  // namespace detail

// Existential quantification with guard detection: when the body is a
// conjunction whose first conjunct is an atom covering the quantified
// variables and the rest, the node is stored in guarded form with the rest
// re-folded into canonical shape.  Otherwise the node is unguarded.
inline Fml mk_exists(std::vector<std::string> vars, Fml raw) {
  std::vector<Fml> parts;
  flatten_and(raw, parts);
  if (is_atomic(parts[0])) {
    Fml rest = conj_of(parts, 1);
    if (detail::guard_covers(parts[0], rest, vars))
      return detail::quant_node(Kind::Exists, std::move(vars), parts[0], rest);
  }
  return detail::quant_node(Kind::Exists, std::move(vars), nullptr, std::move(raw));
}

// Universal quantification; guarded form is an implication from an atomic
// guard covering the quantified variables and the consequent.
inline Fml mk_forall(std::vector<std::string> vars, Fml raw) {
  if (raw->kind == Kind::Implies && is_atomic(raw->a) &&
      detail::guard_covers(raw->a, raw->b, vars))
    return detail::quant_node(Kind::Forall, std::move(vars), raw->a, raw->b);
  return detail::quant_node(Kind::Forall, std::move(vars), nullptr, std::move(raw));
}

// ---------------------------------------------------------------------------
// Lexer / parser
// ---------------------------------------------------------------------------

namespace detail {

enum class Tok { Ident, Number, LP, RP, Comma, Period, Eq, Not, And, Or, Impl, Iff, Slash, End };

struct Token {
  Tok type;
  std::string text;
  int line, col;
};

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto push = [&](Tok t, std::string s) { out.push_back(Token{t, std::move(s), line, col}); };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') { ++i; ++line; col = 1; continue; }
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; ++col; continue; }
    if (c == '#') {  // comment to end of line
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      push(Tok::Ident, text.substr(i, j - i));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && is_ident_char(text[j]))
        throw ParseError("identifiers may not start with a digit", line, col);
      push(Tok::Number, text.substr(i, j - i));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (text.compare(i, 3, "<->") == 0) { push(Tok::Iff, "<->"); i += 3; col += 3; continue; }
    if (text.compare(i, 2, "->") == 0) { push(Tok::Impl, "->"); i += 2; col += 2; continue; }
    switch (c) {
      case '(': push(Tok::LP, "("); break;
      case ')': push(Tok::RP, ")"); break;
      case ',': push(Tok::Comma, ","); break;
      case '.': push(Tok::Period, "."); break;
      case '=': push(Tok::Eq, "="); break;
      case '!': push(Tok::Not, "!"); break;
      case '&': push(Tok::And, "&"); break;
      case '|': push(Tok::Or, "|"); break;
      case '/': push(Tok::Slash, "/"); break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    ++i; ++col;
  }
  out.push_back(Token{Tok::End, "", line, col});
  return out;
}

inline bool is_keyword(const std::string& s) {
  return s == "forall" || s == "exists" || s == "true" || s == "false" || s == "const" || s == "rel";
}

class Parser {
 public:
  Parser(std::vector<Token> toks, Signature sig, bool strict_symbols)
      : toks_(std::move(toks)), sig_(std::move(sig)), strict_(strict_symbols) {}

  void parse_preamble() {
    while (peek().type == Tok::Ident && (peek().text == "const" || peek().text == "rel")) {
      bool consts = peek().text == "const";
      advance();
      while (true) {
        Token name = expect(Tok::Ident, "identifier");
        if (is_keyword(name.text)) fail(name, "reserved word used as a name");
        if (consts) {
          declare_unique(name);
          sig_.consts.push_back(name.text);
        } else {
          expect(Tok::Slash, "'/'");
          Token ar = expect(Tok::Number, "arity");
          int arity = parse_nat(ar);
          declare_unique(name);
          sig_.rels.push_back(Relation{name.text, arity});
        }
        if (peek().type == Tok::Comma) { advance(); continue; }
        break;
      }
      expect(Tok::Period, "'.'");
    }
  }

  Fml parse_formula_top() {
    Fml f = parse_iff();
    if (peek().type != Tok::End) fail(peek(), "trailing input after formula");
    std::set<std::string> free = fv(f);
    if (!free.empty())
      throw ParseError("sentence has free variable '" + *free.begin() + "'", 1, 1);
    return f;
  }

  const Signature& sig() const { return sig_; }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Signature sig_;
  bool strict_;
  std::vector<std::vector<std::string>> scopes_;

  const Token& peek(int off = 0) const { return toks_[std::min(pos_ + off, toks_.size() - 1)]; }
  const Token& advance() { return toks_[pos_++]; }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(msg + (t.text.empty() ? "" : " at '" + t.text + "'"), t.line, t.col);
  }
  Token expect(Tok type, const std::string& what) {
    if (peek().type != type) fail(peek(), "expected " + what);
    return advance();
  }
  int parse_nat(const Token& t) {
    for (char c : t.text)
      if (!std::isdigit(static_cast<unsigned char>(c))) fail(t, "expected a number");
    return std::stoi(t.text);
  }
  void declare_unique(const Token& name) {
    if (sig_.rel_index(name.text) >= 0 || sig_.const_index(name.text) >= 0)
      fail(name, "symbol declared twice");
  }
  bool bound(const std::string& v) const {
    for (const auto& s : scopes_)
      for (const auto& x : s)
        if (x == v) return true;
    return false;
  }

  Fml parse_iff() {
    Fml f = parse_impl();
    while (peek().type == Tok::Iff) {
      advance();
      f = mk_iff(f, parse_impl());
    }
    return f;
  }
  Fml parse_impl() {
    Fml f = parse_or();
    if (peek().type == Tok::Impl) {
      advance();
      return mk_implies(f, parse_impl());
    }
    return f;
  }
  Fml parse_or() {
    Fml f = parse_and();
    while (peek().type == Tok::Or) {
      advance();
      f = mk_or(f, parse_and());
    }
    return f;
  }
  Fml parse_and() {
    Fml f = parse_unary();
    while (peek().type == Tok::And) {
      advance();
      f = mk_and(f, parse_unary());
    }
    return f;
  }

  Fml parse_unary() {
    if (peek().type == Tok::Not) {
      advance();
      return mk_not(parse_unary());
    }
    if (peek().type == Tok::Ident && (peek().text == "forall" || peek().text == "exists"))
      return parse_quant();
    return parse_primary();
  }

  Fml parse_quant() {
    Token kw = advance();
    bool universal = kw.text == "forall";
    std::vector<std::string> vars;
    while (peek().type == Tok::Ident && !is_keyword(peek().text)) {
      Token v = advance();
      if (sig_.const_index(v.text) >= 0) fail(v, "constant used as a bound variable");
      if (sig_.rel_index(v.text) >= 0) fail(v, "relation symbol used as a bound variable");
      for (const auto& u : vars)
        if (u == v.text) fail(v, "variable repeated in quantifier");
      vars.push_back(v.text);
    }
    if (vars.empty()) fail(peek(), "expected quantified variables");
    Fml body;
    scopes_.push_back(vars);
    if (peek().type == Tok::LP) {
      advance();
      body = parse_iff();
      expect(Tok::RP, "')'");
    } else if (peek().type == Tok::Not) {
      advance();
      body = mk_not(parse_unary());
    } else if (peek().type == Tok::Ident && (peek().text == "forall" || peek().text == "exists")) {
      body = parse_quant();
    } else {
      fail(peek(), "expected a parenthesized body after quantifier");
    }
    scopes_.pop_back();
    return universal ? mk_forall(std::move(vars), std::move(body))
                     : mk_exists(std::move(vars), std::move(body));
  }

  Fml parse_primary() {
    const Token& t = peek();
    if (t.type == Tok::LP) {
      advance();
      Fml f = parse_iff();
      expect(Tok::RP, "')'");
      return f;
    }
    if (t.type != Tok::Ident) fail(t, "expected a formula");
    if (t.text == "true") { advance(); return mk_true(); }
    if (t.text == "false") { advance(); return mk_false(); }
    if (is_keyword(t.text)) fail(t, "unexpected keyword");
    // Atom or equality.
    if (peek(1).type == Tok::LP) {
      Token rel = advance();
      advance();  // '('
      std::vector<Term> args;
      while (true) {
        args.push_back(parse_term());
        if (peek().type == Tok::Comma) { advance(); continue; }
        break;
      }
      expect(Tok::RP, "')'");
      int idx = sig_.rel_index(rel.text);
      if (idx >= 0) {
        if (sig_.rels[idx].arity != static_cast<int>(args.size()))
          fail(rel, "relation '" + rel.text + "' used with arity " +
                        std::to_string(args.size()) + ", expected " +
                        std::to_string(sig_.rels[idx].arity));
      } else {
        if (strict_) fail(rel, "undeclared relation '" + rel.text + "'");
        if (sig_.const_index(rel.text) >= 0) fail(rel, "constant used as a relation");
        sig_.rels.push_back(Relation{rel.text, static_cast<int>(args.size())});
      }
      return mk_atom(rel.text, std::move(args));
    }
    Term l = parse_term();
    expect(Tok::Eq, "'=' or '('");
    Term r = parse_term();
    return mk_eq(std::move(l), std::move(r));
  }

  Term parse_term() {
    Token t = expect(Tok::Ident, "a term");
    if (is_keyword(t.text)) fail(t, "reserved word used as a term");
    if (sig_.const_index(t.text) >= 0) return Term{true, t.text};
    if (sig_.rel_index(t.text) >= 0) fail(t, "relation symbol used as a term");
    if (!bound(t.text)) fail(t, "unbound variable '" + t.text + "'");
    return Term{false, t.text};
  }
};

}  // namespace detail

struct ParseResult {
  Fml sentence;
  Signature sig;
};

// Parses a file: optional const/rel preamble, then one sentence.  Undeclared
// relations are inferred from use; constants must be declared.
inline ParseResult parse_sentence(const std::string& text) {
  detail::Parser p(detail::lex(text), Signature{}, /*strict_symbols=*/false);
  p.parse_preamble();
  Fml f = p.parse_formula_top();
  return ParseResult{f, p.sig()};
}

// Parses a bare formula against a fixed signature; all symbols must resolve.
inline Fml parse_formula(const std::string& text, const Signature& sig) {
  detail::Parser p(detail::lex(text), sig, /*strict_symbols=*/true);
  return p.parse_formula_top();
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace detail {

// Higher binds tighter.
inline int precedence(Kind k) {
  switch (k) {
    case Kind::Iff: return 1;
    case Kind::Implies: return 2;
    case Kind::Or: return 3;
    case Kind::And: return 4;
    default: return 5;
  }
}

inline void print_rec(const Fml& f, int parent_prec, bool right_of_impl, std::string& out);

inline void print_child(const Fml& f, int parent_prec, bool assoc_side_ok, std::string& out) {
  int p = precedence(f->kind);
  bool parens = p < parent_prec || (p == parent_prec && !assoc_side_ok);
  if (parens) out += "(";
  print_rec(f, parens ? 0 : p, false, out);
  if (parens) out += ")";
}

inline void print_rec(const Fml& f, int, bool, std::string& out) {
  switch (f->kind) {
    case Kind::True: out += "true"; return;
    case Kind::False: out += "false"; return;
    case Kind::Atom: {
      out += f->rel;
      out += "(";
      for (std::size_t i = 0; i < f->args.size(); ++i) {
        if (i) out += ",";
        out += f->args[i].name;
      }
      out += ")";
      return;
    }
    case Kind::Eq:
      out += f->args[0].name;
      out += " = ";
      out += f->args[1].name;
      return;
    case Kind::Not: {
      out += "!";
      int p = precedence(f->a->kind);
      bool parens = p < 5;
      if (parens) out += "(";
      print_rec(f->a, 0, false, out);
      if (parens) out += ")";
      return;
    }
    case Kind::And:
    case Kind::Or:
    case Kind::Iff: {
      // Left-associative chains print flat.
      int p = precedence(f->kind);
      print_child(f->a, p, true, out);
      out += f->kind == Kind::And ? " & " : f->kind == Kind::Or ? " | " : " <-> ";
      print_child(f->b, p, false, out);
      return;
    }
    case Kind::Implies: {
      int p = precedence(f->kind);
      print_child(f->a, p, false, out);  // right-associative: left child needs parens on tie
      out += " -> ";
      print_child(f->b, p, true, out);
      return;
    }
    case Kind::Exists:
    case Kind::Forall: {
      out += f->kind == Kind::Exists ? "exists" : "forall";
      for (const auto& v : f->vars) {
        out += " ";
        out += v;
      }
      out += " (";
      if (f->guard) {
        if (f->kind == Kind::Exists) {
          print_child(f->guard, precedence(Kind::And), true, out);
          if (f->body->kind != Kind::True) {
            // The stored body is a canonical fold, so printing the guard and
            // its conjuncts as one flat chain reparses to the same node.
            std::vector<Fml> parts;
            flatten_and(f->body, parts);
            for (const auto& part : parts) {
              out += " & ";
              print_child(part, precedence(Kind::And), true, out);
            }
          }
        } else {
          print_child(f->guard, precedence(Kind::Implies), false, out);
          out += " -> ";
          print_child(f->body, precedence(Kind::Implies), true, out);
        }
      } else {
        print_rec(f->body, 0, false, out);
      }
      out += ")";
      return;
    }
  }
}

}  // namespace detail

inline std::string print(const Fml& f) {
  std::string out;
  detail::print_rec(f, 0, false, out);
  return out;
}

// Preamble (rel and const declarations) followed by the formula text.
inline std::string serialize_sentence(const Fml& f, const Signature& sig) {
  std::string out;
  if (!sig.rels.empty()) {
    out += "rel ";
    for (std::size_t i = 0; i < sig.rels.size(); ++i) {
      if (i) out += ", ";
      out += sig.rels[i].name + "/" + std::to_string(sig.rels[i].arity);
    }
    out += ".\n";
  }
  if (!sig.consts.empty()) {
    out += "const ";
    for (std::size_t i = 0; i < sig.consts.size(); ++i) {
      if (i) out += ", ";
      out += sig.consts[i];
    }
    out += ".\n";
  }
  out += print(f);
  out += "\n";
  return out;
}

// Token count of the canonical printed form: parentheses, connectives,
// quantifiers, variables, relation symbols, and constants each count 1;
// commas are not counted.
inline int length(const Fml& f) {
  int n = 0;
  for (const auto& t : detail::lex(print(f))) {
    if (t.type == detail::Tok::End || t.type == detail::Tok::Comma ||
        t.type == detail::Tok::Period)
      continue;
    ++n;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Classification, signature extraction
// ---------------------------------------------------------------------------

enum class FragmentTag { GF, TGF, FO };

namespace detail {
inline void classify_rec(const Fml& f, bool& unguarded_ok2, bool& unguarded_bad) {
  switch (f->kind) {
    case Kind::True:
    case Kind::False:
    case Kind::Atom:
    case Kind::Eq:
      return;
    case Kind::Not:
      classify_rec(f->a, unguarded_ok2, unguarded_bad);
      return;
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
    case Kind::Iff:
      classify_rec(f->a, unguarded_ok2, unguarded_bad);
      classify_rec(f->b, unguarded_ok2, unguarded_bad);
      return;
    case Kind::Exists:
    case Kind::Forall:
      if (!f->guard) {
        if (fv(f->body).size() <= 2)
          unguarded_ok2 = true;
        else
          unguarded_bad = true;
      }
      if (f->guard) classify_rec(f->guard, unguarded_ok2, unguarded_bad);
      classify_rec(f->body, unguarded_ok2, unguarded_bad);
      return;
  }
}
}  // namespace detail

inline FragmentTag classify(const Fml& f) {
  bool ok2 = false, bad = false;
  detail::classify_rec(f, ok2, bad);
  if (bad) return FragmentTag::FO;
  return ok2 ? FragmentTag::TGF : FragmentTag::GF;
}

inline bool equality_free(const Fml& f) {
  if (f->kind == Kind::Eq) return false;
  bool ok = true;
  if (f->a) ok = ok && equality_free(f->a);
  if (f->b) ok = ok && equality_free(f->b);
  if (f->guard) ok = ok && equality_free(f->guard);
  if (f->body) ok = ok && equality_free(f->body);
  return ok;
}

inline bool constant_free(const Fml& f) {
  for (const auto& t : f->args)
    if (t.is_const) return false;
  bool ok = true;
  if (f->a) ok = ok && constant_free(f->a);
  if (f->b) ok = ok && constant_free(f->b);
  if (f->guard) ok = ok && constant_free(f->guard);
  if (f->body) ok = ok && constant_free(f->body);
  return ok;
}

namespace detail {
inline void collect_symbols(const Fml& f, Signature& sig) {
  if (f->kind == Kind::Atom) {
    int idx = sig.rel_index(f->rel);
    if (idx >= 0) {
      if (sig.rels[idx].arity != static_cast<int>(f->args.size()))
        throw std::invalid_argument("relation '" + f->rel + "' used with two arities");
    } else {
      sig.rels.push_back(Relation{f->rel, static_cast<int>(f->args.size())});
    }
  }
  for (const auto& t : f->args)
    if (t.is_const && sig.const_index(t.name) < 0) sig.consts.push_back(t.name);
  if (f->a) collect_symbols(f->a, sig);
  if (f->b) collect_symbols(f->b, sig);
  if (f->guard) collect_symbols(f->guard, sig);
  if (f->body) collect_symbols(f->body, sig);
}
}  // namespace detail

// Exactly the symbols occurring in the formula, in first-occurrence order.
inline Signature signature_of(const Fml& f) {
  Signature sig;
  detail::collect_symbols(f, sig);
  return sig;
}

// ---------------------------------------------------------------------------
// TGF to GFU
// ---------------------------------------------------------------------------

struct GfuResult {
  Fml sentence;
  Signature sig;       // input signature plus the universal role
  std::string u_name;  // name of the universal role
};

namespace detail {

inline void reject_variable_equality(const Fml& f) {
  if (f->kind == Kind::Eq && !f->args[0].is_const && !f->args[1].is_const &&
      f->args[0].name != f->args[1].name)
    throw FragmentError(
        "equality between distinct variables is not supported in the triguarded pipeline");
  if (f->a) reject_variable_equality(f->a);
  if (f->b) reject_variable_equality(f->b);
  if (f->guard) reject_variable_equality(f->guard);
  if (f->body) reject_variable_equality(f->body);
}

inline Fml guard_unguarded(const Fml& f, const std::string& u) {
  switch (f->kind) {
    case Kind::True:
    case Kind::False:
    case Kind::Atom:
    case Kind::Eq:
      return f;
    case Kind::Not:
      return mk_not(guard_unguarded(f->a, u));
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
    case Kind::Iff:
      return mk_binary(f->kind, guard_unguarded(f->a, u), guard_unguarded(f->b, u));
    case Kind::Exists:
    case Kind::Forall: {
      Fml body = guard_unguarded(f->body, u);
      if (f->guard) {
        // Rebuild through the smart constructor to preserve the guarded shape.
        if (f->kind == Kind::Exists)
          return mk_exists(f->vars, body->kind == Kind::True ? f->guard : mk_and(f->guard, body));
        return mk_forall(f->vars, mk_implies(f->guard, body));
      }
      std::set<std::string> free = fv(body);
      if (free.size() > 2)
        throw FragmentError("unguarded quantifier over a formula with " +
                            std::to_string(free.size()) + " free variables");
      // Drop quantified variables that do not occur; wrap the used ones
      // innermost-first with the universal role as a dummy guard.
      std::vector<std::string> used;
      for (const auto& v : f->vars)
        if (free.count(v)) used.push_back(v);
      Fml acc = body;
      for (auto it = used.rbegin(); it != used.rend(); ++it) {
        std::set<std::string> accf = fv(acc);
        std::string other = *it;
        for (const auto& w : accf)
          if (w != *it) { other = w; break; }
        Fml g = mk_atom(u, {Term{false, *it}, Term{false, other}});
        acc = f->kind == Kind::Exists
                  ? mk_exists({*it}, acc->kind == Kind::True ? g : mk_and(g, acc))
                  : mk_forall({*it}, mk_implies(g, acc));
      }
      return acc;
    }
  }
  return f;
}

}  // namespace detail

// Rewrites a (possibly triguarded) sentence into the guarded fragment over
// the signature extended with a universal role: every unguarded quantifier
// is wrapped variable by variable with the role as a dummy guard.  The
// universal-role semantics (the role holds everywhere) is enforced by the
// witness stage, not syntactically.
inline GfuResult tgf_to_gfu(const Fml& f, const Signature& sig) {
  if (classify(f) == FragmentTag::FO)
    throw FragmentError("sentence is outside the triguarded fragment");
  detail::reject_variable_equality(f);
  std::string u = "U";
  for (int i = 0; sig.rel_index(u) >= 0 || sig.const_index(u) >= 0; ++i)
    u = "U" + std::to_string(i);
  Signature out = sig;
  out.rels.push_back(Relation{u, 2});
  return GfuResult{detail::guard_unguarded(f, u), out, u};
}

}  // namespace gfm
