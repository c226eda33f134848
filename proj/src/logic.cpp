#include "pfc/logic.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <set>
#include <utility>

namespace pfc::logic {

namespace {

void merge_names(std::vector<std::string>& into, const std::vector<std::string>& from) {
  for (const auto& n : from)
    if (std::find(into.begin(), into.end(), n) == into.end()) into.push_back(n);
}

std::vector<std::string> term_variables(const std::vector<Term>& terms) {
  std::vector<std::string> out;
  for (const auto& t : terms)
    if (t.kind == Term::Kind::Variable &&
        std::find(out.begin(), out.end(), t.name) == out.end())
      out.push_back(t.name);
  return out;
}

}  // namespace

const Relation* Signature::find_relation(const std::string& name) const {
  for (const auto& r : relations)
    if (r.name == name) return &r;
  return nullptr;
}

bool Signature::has_constant(const std::string& name) const {
  return std::find(constants.begin(), constants.end(), name) != constants.end();
}

void Signature::validate() const {
  std::set<std::string> seen;
  for (const auto& r : relations) {
    if (r.name.empty()) throw ConfigError("signature: empty relation name");
    if (r.arity == 0) throw ConfigError("signature: relation '" + r.name + "' has arity 0");
    if (!seen.insert(r.name).second)
      throw ConfigError("signature: duplicate symbol '" + r.name + "'");
  }
  for (const auto& c : constants) {
    if (c.empty()) throw ConfigError("signature: empty constant name");
    if (!seen.insert(c).second) throw ConfigError("signature: duplicate symbol '" + c + "'");
  }
}

FormulaPtr Formula::atom(std::string relation, std::vector<Term> args) {
  std::shared_ptr<Formula> n(new Formula());
  n->kind_ = Kind::Atom;
  n->symbol_ = std::move(relation);
  n->terms_ = std::move(args);
  n->free_vars_ = term_variables(n->terms_);
  return n;
}

FormulaPtr Formula::equality(Term left, Term right) {
  std::shared_ptr<Formula> n(new Formula());
  n->kind_ = Kind::Equality;
  n->terms_ = {std::move(left), std::move(right)};
  n->free_vars_ = term_variables(n->terms_);
  return n;
}

FormulaPtr Formula::negation(FormulaPtr f) {
  std::shared_ptr<Formula> n(new Formula());
  n->kind_ = Kind::Not;
  n->free_vars_ = f->free_variables();
  n->lhs_ = std::move(f);
  return n;
}

FormulaPtr Formula::make_binary(Kind k, FormulaPtr l, FormulaPtr r) {
  std::shared_ptr<Formula> n(new Formula());
  n->kind_ = k;
  n->free_vars_ = l->free_variables();
  merge_names(n->free_vars_, r->free_variables());
  n->lhs_ = std::move(l);
  n->rhs_ = std::move(r);
  return n;
}

FormulaPtr Formula::conjunction(FormulaPtr l, FormulaPtr r) {
  return make_binary(Kind::And, std::move(l), std::move(r));
}
FormulaPtr Formula::disjunction(FormulaPtr l, FormulaPtr r) {
  return make_binary(Kind::Or, std::move(l), std::move(r));
}
FormulaPtr Formula::implication(FormulaPtr l, FormulaPtr r) {
  return make_binary(Kind::Implies, std::move(l), std::move(r));
}

FormulaPtr Formula::make_quantifier(Kind k, std::string var, FormulaPtr body) {
  std::shared_ptr<Formula> n(new Formula());
  n->kind_ = k;
  for (const auto& v : body->free_variables())
    if (v != var) n->free_vars_.push_back(v);
  n->symbol_ = std::move(var);
  n->lhs_ = std::move(body);
  return n;
}

FormulaPtr Formula::exists(std::string var, FormulaPtr body) {
  return make_quantifier(Kind::Exists, std::move(var), std::move(body));
}
FormulaPtr Formula::for_all(std::string var, FormulaPtr body) {
  return make_quantifier(Kind::ForAll, std::move(var), std::move(body));
}

bool equal(const Formula& a, const Formula& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Formula::Kind::Atom:
      return a.relation() == b.relation() && a.terms() == b.terms();
    case Formula::Kind::Equality:
      return a.terms() == b.terms();
    case Formula::Kind::Not:
      return equal(*a.lhs(), *b.lhs());
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies:
      return equal(*a.lhs(), *b.lhs()) && equal(*a.rhs(), *b.rhs());
    case Formula::Kind::ForAll:
    case Formula::Kind::Exists:
      return a.variable() == b.variable() && equal(*a.body(), *b.body());
  }
  return false;
}

const std::vector<std::string>& free_variables(const Formula& f) { return f.free_variables(); }
bool is_sentence(const Formula& f) { return f.free_variables().empty(); }

// ---------------------------------------------------------------------------
// Pretty printer. Effective levels: Implies and quantifiers 1, Or 2, And 3,
// Not/Atom/Equality 4. A node is parenthesized when its level is below the
// level its context requires; quantifier bodies print at level 1 because
// their scope extends maximally right.
// ---------------------------------------------------------------------------

namespace {

int effective_level(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Implies:
    case Formula::Kind::ForAll:
    case Formula::Kind::Exists:
      return 1;
    case Formula::Kind::Or:
      return 2;
    case Formula::Kind::And:
      return 3;
    default:
      return 4;
  }
}

void print_node(const Formula& f, int min_level, std::string& out) {
  const bool parens = effective_level(f) < min_level;
  if (parens) out += '(';
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      out += f.relation();
      out += '(';
      for (std::size_t i = 0; i < f.terms().size(); ++i) {
        if (i) out += ", ";
        out += f.terms()[i].name;
      }
      out += ')';
      break;
    }
    case Formula::Kind::Equality:
      out += f.terms()[0].name;
      out += " = ";
      out += f.terms()[1].name;
      break;
    case Formula::Kind::Not:
      out += '!';
      print_node(*f.lhs(), 4, out);
      break;
    case Formula::Kind::And:
      print_node(*f.lhs(), 3, out);
      out += " & ";
      print_node(*f.rhs(), 4, out);
      break;
    case Formula::Kind::Or:
      print_node(*f.lhs(), 2, out);
      out += " | ";
      print_node(*f.rhs(), 3, out);
      break;
    case Formula::Kind::Implies:
      print_node(*f.lhs(), 2, out);
      out += " -> ";
      print_node(*f.rhs(), 1, out);
      break;
    case Formula::Kind::ForAll:
    case Formula::Kind::Exists:
      out += f.kind() == Formula::Kind::ForAll ? "forall " : "exists ";
      out += f.variable();
      out += ". ";
      print_node(*f.body(), 1, out);
      break;
  }
  if (parens) out += ')';
}

}  // namespace

std::string to_string(const Formula& f) {
  std::string out;
  print_node(f, 1, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parser: lexer -> raw tree (terms classified against scope and signature)
// -> bound-variable renaming -> immutable Formula.
// ---------------------------------------------------------------------------

namespace {

enum class Tok {
  Ident,
  ForAll,
  Exists,
  LParen,
  RParen,
  Comma,
  Dot,
  Eq,
  Amp,
  Pipe,
  Bang,
  Arrow,
  Iff,
  End
};

struct Token {
  Tok type;
  std::string text;
  std::size_t pos;
};

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Tok t, std::size_t pos, std::string text = {}) {
    out.push_back({t, std::move(text), pos});
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
        ++j;
      std::string w = s.substr(i, j - i);
      if (w == "forall")
        push(Tok::ForAll, i);
      else if (w == "exists")
        push(Tok::Exists, i);
      else
        push(Tok::Ident, i, std::move(w));
      i = j;
      continue;
    }
    switch (c) {
      case '(': push(Tok::LParen, i); ++i; break;
      case ')': push(Tok::RParen, i); ++i; break;
      case ',': push(Tok::Comma, i); ++i; break;
      case '.': push(Tok::Dot, i); ++i; break;
      case '=': push(Tok::Eq, i); ++i; break;
      case '&': push(Tok::Amp, i); ++i; break;
      case '|': push(Tok::Pipe, i); ++i; break;
      case '!': push(Tok::Bang, i); ++i; break;
      case '-':
        if (i + 1 < s.size() && s[i + 1] == '>') {
          push(Tok::Arrow, i);
          i += 2;
        } else {
          throw ParseError("stray '-', expected '->'", i);
        }
        break;
      case '<':
        if (i + 2 < s.size() && s[i + 1] == '-' && s[i + 2] == '>') {
          push(Tok::Iff, i);
          i += 3;
        } else {
          throw ParseError("stray '<', expected '<->'", i);
        }
        break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
  }
  push(Tok::End, s.size());
  return out;
}

struct RawTerm {
  enum class Kind { Bound, Free, Const };
  Kind kind;
  std::string name;
  int binder = -1;  // quantifier id for Bound terms
};

struct RawNode {
  Formula::Kind kind;
  std::string name;  // relation name or quantifier source name
  std::vector<RawTerm> terms;
  std::unique_ptr<RawNode> a, b;
  int binder_id = -1;  // quantifier id
};

using RawPtr = std::unique_ptr<RawNode>;

struct Parser {
  const std::vector<Token>& toks;
  const Signature& sig;
  std::size_t at = 0;
  int next_binder = 0;
  std::vector<std::pair<std::string, int>> scope;  // innermost last
  std::set<std::string> idents;                    // every identifier token seen
  std::set<std::string> free_names;

  const Token& peek() const { return toks[at]; }
  Token take() { return toks[at++]; }
  void expect(Tok t, const char* what) {
    if (peek().type != t) throw ParseError(std::string("expected ") + what, peek().pos);
    ++at;
  }

  RawPtr node(Formula::Kind k) {
    auto n = std::make_unique<RawNode>();
    n->kind = k;
    return n;
  }

  RawTerm classify(const std::string& name) {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == name) return {RawTerm::Kind::Bound, name, it->second};
    if (sig.has_constant(name)) return {RawTerm::Kind::Const, name, -1};
    free_names.insert(name);
    return {RawTerm::Kind::Free, name, -1};
  }

  RawPtr parse_formula() { return parse_iff(); }

  RawPtr parse_iff() {
    RawPtr left = parse_imp();
    while (peek().type == Tok::Iff) {
      take();
      RawPtr right = parse_imp();
      // a <-> b  ==  (a -> b) & (b -> a); operands are deep-copied so the
      // renaming pass can give each copy its own bound names.
      RawPtr lcopy = clone(*left);
      RawPtr rcopy = clone(*right);
      auto fwd = node(Formula::Kind::Implies);
      fwd->a = std::move(left);
      fwd->b = std::move(right);
      auto back = node(Formula::Kind::Implies);
      back->a = std::move(rcopy);
      back->b = std::move(lcopy);
      auto both = node(Formula::Kind::And);
      both->a = std::move(fwd);
      both->b = std::move(back);
      left = std::move(both);
    }
    return left;
  }

  RawPtr clone(const RawNode& n) {
    // Deep copy with fresh binder ids so each copy renames independently.
    std::map<int, int> remap;
    return clone_rec(n, remap);
  }

  RawPtr clone_rec(const RawNode& n, std::map<int, int>& remap) {
    auto c = std::make_unique<RawNode>();
    c->kind = n.kind;
    c->name = n.name;
    if (n.binder_id >= 0) {
      c->binder_id = next_binder++;
      remap[n.binder_id] = c->binder_id;
    }
    c->terms = n.terms;
    for (auto& t : c->terms)
      if (t.kind == RawTerm::Kind::Bound) {
        auto it = remap.find(t.binder);
        if (it != remap.end()) t.binder = it->second;
      }
    if (n.a) c->a = clone_rec(*n.a, remap);
    if (n.b) c->b = clone_rec(*n.b, remap);
    return c;
  }

  RawPtr parse_imp() {
    std::vector<RawPtr> parts;
    parts.push_back(parse_or());
    while (peek().type == Tok::Arrow) {
      take();
      parts.push_back(parse_or());
    }
    RawPtr right = std::move(parts.back());
    for (std::size_t i = parts.size() - 1; i-- > 0;) {  // right associative
      auto n = node(Formula::Kind::Implies);
      n->a = std::move(parts[i]);
      n->b = std::move(right);
      right = std::move(n);
    }
    return right;
  }

  RawPtr parse_or() {
    RawPtr left = parse_and();
    while (peek().type == Tok::Pipe) {
      take();
      auto n = node(Formula::Kind::Or);
      n->a = std::move(left);
      n->b = parse_and();
      left = std::move(n);
    }
    return left;
  }

  RawPtr parse_and() {
    RawPtr left = parse_unary();
    while (peek().type == Tok::Amp) {
      take();
      auto n = node(Formula::Kind::And);
      n->a = std::move(left);
      n->b = parse_unary();
      left = std::move(n);
    }
    return left;
  }

  RawPtr parse_unary() {
    switch (peek().type) {
      case Tok::Bang: {
        take();
        auto n = node(Formula::Kind::Not);
        n->a = parse_unary();
        return n;
      }
      case Tok::ForAll:
      case Tok::Exists: {
        const bool universal = take().type == Tok::ForAll;
        if (peek().type != Tok::Ident)
          throw ParseError("expected variable name after quantifier", peek().pos);
        Token v = take();
        idents.insert(v.text);
        expect(Tok::Dot, "'.' after quantified variable");
        auto n = node(universal ? Formula::Kind::ForAll : Formula::Kind::Exists);
        n->name = v.text;
        n->binder_id = next_binder++;
        scope.emplace_back(v.text, n->binder_id);
        n->a = parse_formula();  // scope extends maximally right
        scope.pop_back();
        return n;
      }
      default:
        return parse_atom();
    }
  }

  RawPtr parse_atom() {
    if (peek().type == Tok::LParen) {
      take();
      RawPtr inner = parse_formula();
      expect(Tok::RParen, "')'");
      return inner;
    }
    if (peek().type != Tok::Ident)
      throw ParseError("expected a formula", peek().pos);
    Token head = take();
    idents.insert(head.text);
    if (peek().type == Tok::LParen) {
      // relation application
      const Relation* rel = sig.find_relation(head.text);
      if (!rel) throw ParseError("unknown relation '" + head.text + "'", head.pos);
      take();
      auto n = node(Formula::Kind::Atom);
      n->name = head.text;
      n->terms.push_back(parse_term());
      while (peek().type == Tok::Comma) {
        take();
        n->terms.push_back(parse_term());
      }
      expect(Tok::RParen, "')'");
      if (n->terms.size() != rel->arity)
        throw ParseError("relation '" + rel->name + "' expects " +
                             std::to_string(rel->arity) + " argument(s), got " +
                             std::to_string(n->terms.size()),
                         head.pos);
      return n;
    }
    // term "=" term
    RawTerm left = classify(head.text);
    if (peek().type != Tok::Eq)
      throw ParseError("expected '(' or '=' after identifier", peek().pos);
    take();
    auto n = node(Formula::Kind::Equality);
    n->terms.push_back(std::move(left));
    n->terms.push_back(parse_term());
    return n;
  }

  RawTerm parse_term() {
    if (peek().type != Tok::Ident) throw ParseError("expected a term", peek().pos);
    Token t = take();
    idents.insert(t.text);
    return classify(t.text);
  }
};

// Renaming pass: every quantifier gets a final name that collides with no
// free variable, no constant or relation name, and no other final bound name.
// A source name is kept when it is already safe, so typical input survives
// verbatim and printing then reparsing is the identity.
struct Renamer {
  const std::set<std::string>& all_idents;
  std::set<std::string> avoid;     // free names + signature symbols
  std::set<std::string> assigned;  // final bound names handed out so far
  std::map<int, std::string> final_name;

  std::string pick(const std::string& source) {
    if (!avoid.count(source) && !assigned.count(source)) {
      assigned.insert(source);
      return source;
    }
    for (int k = 2;; ++k) {
      std::string cand = source + "_" + std::to_string(k);
      if (!avoid.count(cand) && !assigned.count(cand) && !all_idents.count(cand)) {
        assigned.insert(cand);
        return cand;
      }
    }
  }

  FormulaPtr build(const RawNode& n) {
    switch (n.kind) {
      case Formula::Kind::Atom: {
        std::vector<Term> args;
        args.reserve(n.terms.size());
        for (const auto& t : n.terms) args.push_back(term(t));
        return Formula::atom(n.name, std::move(args));
      }
      case Formula::Kind::Equality:
        return Formula::equality(term(n.terms[0]), term(n.terms[1]));
      case Formula::Kind::Not:
        return Formula::negation(build(*n.a));
      case Formula::Kind::And:
        return Formula::conjunction(build(*n.a), build(*n.b));
      case Formula::Kind::Or:
        return Formula::disjunction(build(*n.a), build(*n.b));
      case Formula::Kind::Implies:
        return Formula::implication(build(*n.a), build(*n.b));
      case Formula::Kind::ForAll:
      case Formula::Kind::Exists: {
        std::string name = pick(n.name);
        final_name[n.binder_id] = name;  // pre-order: decide before the body
        FormulaPtr body = build(*n.a);
        return n.kind == Formula::Kind::ForAll ? Formula::for_all(std::move(name), std::move(body))
                                               : Formula::exists(std::move(name), std::move(body));
      }
    }
    throw Error("unreachable formula kind");
  }

  Term term(const RawTerm& t) {
    switch (t.kind) {
      case RawTerm::Kind::Const:
        return {Term::Kind::Constant, t.name};
      case RawTerm::Kind::Free:
        return {Term::Kind::Variable, t.name};
      case RawTerm::Kind::Bound:
        return {Term::Kind::Variable, final_name.at(t.binder)};
    }
    throw Error("unreachable term kind");
  }
};

}  // namespace

FormulaPtr parse_formula(const std::string& text, const Signature& sig) {
  sig.validate();
  const std::vector<Token> toks = lex(text);
  Parser p{toks, sig, 0, 0, {}, {}, {}};
  RawPtr raw = p.parse_formula();
  if (p.peek().type != Tok::End)
    throw ParseError("unexpected trailing input", p.peek().pos);

  Renamer r{p.idents, {}, {}, {}};
  r.avoid = p.free_names;
  for (const auto& rel : sig.relations) r.avoid.insert(rel.name);
  for (const auto& c : sig.constants) r.avoid.insert(c);
  return r.build(*raw);
}

VariablePartition make_partition(const Formula& f, std::vector<std::string> object_vars,
                                 std::vector<std::string> parameter_vars,
                                 bool require_exact_cover) {
  const auto& free = f.free_variables();
  auto is_free = [&](const std::string& v) {
    return std::find(free.begin(), free.end(), v) != free.end();
  };
  std::set<std::string> seen;
  for (const auto& v : object_vars) {
    if (!is_free(v)) throw EvalError("object variable '" + v + "' is not free in the formula");
    if (!seen.insert(v).second) throw EvalError("variable '" + v + "' listed twice in partition");
  }
  for (const auto& v : parameter_vars) {
    if (!is_free(v)) throw EvalError("parameter variable '" + v + "' is not free in the formula");
    if (!seen.insert(v).second) throw EvalError("variable '" + v + "' listed twice in partition");
  }
  if (require_exact_cover && seen.size() != free.size())
    throw EvalError("partition does not cover the formula's free variables");
  return {std::move(object_vars), std::move(parameter_vars)};
}

}  // namespace pfc::logic
