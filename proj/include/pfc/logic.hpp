#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pfc/errors.hpp"

namespace pfc::logic {

struct Relation {
  std::string name;
  unsigned arity = 1;
  bool operator==(const Relation&) const = default;
};

// Relational vocabulary plus optional constant symbols. Relation names must
// be unique with arity >= 1; constant names must not collide with each other
// or with relation names.
struct Signature {
  std::vector<Relation> relations;
  std::vector<std::string> constants;

  const Relation* find_relation(const std::string& name) const;
  bool has_constant(const std::string& name) const;
  void validate() const;  // throws ConfigError
  bool operator==(const Signature&) const = default;
};

struct Term {
  enum class Kind { Variable, Constant };
  Kind kind = Kind::Variable;
  std::string name;
  bool operator==(const Term&) const = default;
};

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable first-order formula tree. Build through the factories or through
// parse_formula. Evaluation assumes no quantifier on a root-to-leaf branch
// rebinds a name that is bound or free above it; the parser's renaming pass
// guarantees this for parsed input, and callers of the factories are expected
// to pick fresh bound names themselves.
class Formula {
 public:
  enum class Kind { Atom, Equality, Not, And, Or, Implies, ForAll, Exists };

  Kind kind() const { return kind_; }
  const std::string& relation() const { return symbol_; }    // Atom
  const std::vector<Term>& terms() const { return terms_; }  // Atom, Equality
  const std::string& variable() const { return symbol_; }    // ForAll, Exists
  const FormulaPtr& lhs() const { return lhs_; }             // binary left / Not child
  const FormulaPtr& rhs() const { return rhs_; }             // binary right
  const FormulaPtr& body() const { return lhs_; }            // quantifier body

  // Free variables in first-occurrence order (left to right).
  const std::vector<std::string>& free_variables() const { return free_vars_; }

  static FormulaPtr atom(std::string relation, std::vector<Term> args);
  static FormulaPtr equality(Term left, Term right);
  static FormulaPtr negation(FormulaPtr f);
  static FormulaPtr conjunction(FormulaPtr l, FormulaPtr r);
  static FormulaPtr disjunction(FormulaPtr l, FormulaPtr r);
  static FormulaPtr implication(FormulaPtr l, FormulaPtr r);
  static FormulaPtr exists(std::string var, FormulaPtr body);
  static FormulaPtr for_all(std::string var, FormulaPtr body);

 private:
  Formula() = default;
  static FormulaPtr make_binary(Kind k, FormulaPtr l, FormulaPtr r);
  static FormulaPtr make_quantifier(Kind k, std::string var, FormulaPtr body);

  Kind kind_ = Kind::Atom;
  std::string symbol_;
  std::vector<Term> terms_;
  FormulaPtr lhs_, rhs_;
  std::vector<std::string> free_vars_;
};

// Structural equality (names included).
bool equal(const Formula& a, const Formula& b);

// Canonical text; parse_formula(to_string(f)) rebuilds f node for node.
std::string to_string(const Formula& f);

const std::vector<std::string>& free_variables(const Formula& f);
bool is_sentence(const Formula& f);

// Grammar (low to high precedence; quantifier scope extends maximally right):
//
//   formula := iff
//   iff     := imp ("<->" imp)*        desugared: a <-> b  ==  (a -> b) & (b -> a)
//   imp     := or ("->" or)*           right associative
//   or      := and ("|" and)*
//   and     := unary ("&" unary)*
//   unary   := "!" unary | "forall" v "." formula | "exists" v "." formula | atom
//   atom    := name "(" term ("," term)* ")" | term "=" term | "(" formula ")"
//   term    := identifier
//
// Identifiers are [A-Za-z_][A-Za-z0-9_]*; "forall"/"exists" are reserved. An
// identifier in term position is the declared constant of that name if one
// exists and it is not bound by an enclosing quantifier; otherwise it is a
// variable. Relation applications are checked against the signature (unknown
// relation, arity mismatch). Bound variables are renamed to fresh names at
// parse time so that no two quantifiers in the tree share a name and no bound
// name shadows a free variable or constant.
//
// Throws ParseError with a byte position on bad input.
FormulaPtr parse_formula(const std::string& text, const Signature& sig);

// Splits a formula's free variables into object variables (counted over) and
// parameter variables (fixed per fiber).
struct VariablePartition {
  std::vector<std::string> object_vars;
  std::vector<std::string> parameter_vars;
};

// Validates disjointness and membership in free(f). With require_exact_cover
// the two groups must cover free(f) exactly; otherwise leftover free
// variables remain for an outer assignment. Throws EvalError.
VariablePartition make_partition(const Formula& f, std::vector<std::string> object_vars,
                                 std::vector<std::string> parameter_vars,
                                 bool require_exact_cover = true);

}  // namespace pfc::logic
