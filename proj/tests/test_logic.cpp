#include <doctest.h>

#include <random>

#include "generators.hpp"
#include "pfc/errors.hpp"
#include "pfc/logic.hpp"
#include "pfc/structures.hpp"

using namespace pfc;
using logic::Formula;
using logic::Term;

namespace {
const logic::Signature& k23() {
  static const logic::Signature sig = structures::k23_signature();
  return sig;
}
}  // namespace

TEST_CASE("signature validation") {
  CHECK_NOTHROW(k23().validate());
  CHECK(k23().find_relation("R") != nullptr);
  CHECK(k23().find_relation("R")->arity == 2);
  CHECK(k23().find_relation("nope") == nullptr);
  CHECK_FALSE(k23().has_constant("c"));

  logic::Signature dup{{{"R", 1}, {"R", 2}}, {}};
  CHECK_THROWS_AS(dup.validate(), ConfigError);
  logic::Signature zero_arity{{{"R", 0}}, {}};
  CHECK_THROWS_AS(zero_arity.validate(), ConfigError);
  logic::Signature clash{{{"R", 1}}, {"R"}};
  CHECK_THROWS_AS(clash.validate(), ConfigError);
  logic::Signature dup_const{{}, {"c", "c"}};
  CHECK_THROWS_AS(dup_const.validate(), ConfigError);
}

TEST_CASE("parsing precedence and associativity") {
  const auto f = logic::parse_formula("P0(x) | P1(x) & P0(y)", k23());
  REQUIRE(f->kind() == Formula::Kind::Or);
  CHECK(f->rhs()->kind() == Formula::Kind::And);

  const auto imp = logic::parse_formula("P0(x) -> P0(y) -> P0(z)", k23());
  REQUIRE(imp->kind() == Formula::Kind::Implies);
  CHECK(imp->rhs()->kind() == Formula::Kind::Implies);  // right associative
  CHECK(imp->lhs()->kind() == Formula::Kind::Atom);

  const auto neg = logic::parse_formula("!P0(x) & P1(y)", k23());
  REQUIRE(neg->kind() == Formula::Kind::And);
  CHECK(neg->lhs()->kind() == Formula::Kind::Not);

  // <-> desugars to the two-implication conjunction.
  const auto iff = logic::parse_formula("P0(x) <-> P1(x)", k23());
  CHECK(logic::to_string(*iff) == "(P0(x) -> P1(x)) & (P1(x) -> P0(x))");

  // Quantifier scope extends maximally to the right.
  const auto q = logic::parse_formula("exists u. R(x, u) & R(y, u)", k23());
  REQUIRE(q->kind() == Formula::Kind::Exists);
  CHECK(q->free_variables() == std::vector<std::string>{"x", "y"});

  const auto paren = logic::parse_formula("(exists u. R(x, u)) & R(y, u)", k23());
  REQUIRE(paren->kind() == Formula::Kind::And);
  CHECK(paren->free_variables() == std::vector<std::string>{"x", "y", "u"});
}

TEST_CASE("free variables in first-occurrence order") {
  const auto f = logic::parse_formula("R(y, x) & P0(z)", k23());
  CHECK(f->free_variables() == std::vector<std::string>{"y", "x", "z"});
  CHECK(logic::free_variables(*f) == f->free_variables());
  CHECK_FALSE(logic::is_sentence(*f));
  CHECK(logic::is_sentence(*logic::parse_formula("forall x. P0(x) | P1(x)", k23())));
}

TEST_CASE("bound variables renamed away from free ones") {
  const auto f = logic::parse_formula("(exists x. P0(x)) & P1(x)", k23());
  CHECK(logic::to_string(*f) == "(exists x_2. P0(x_2)) & P1(x)");
  CHECK(f->free_variables() == std::vector<std::string>{"x"});

  // Two quantifiers reusing one source name get distinct final names.
  const auto g = logic::parse_formula("(exists z. P0(z)) & (exists z. P1(z))", k23());
  CHECK(g->lhs()->variable() != g->rhs()->variable());
}

TEST_CASE("constants in term position") {
  const logic::Signature sig{{{"R", 2}}, {"c"}};
  const auto f = logic::parse_formula("R(x, c)", sig);
  CHECK(f->free_variables() == std::vector<std::string>{"x"});
  CHECK(f->terms()[1].kind == Term::Kind::Constant);

  // Binding the constant's name shadows it; the binder is renamed away so the
  // printed form cannot be re-read as the constant.
  const auto g = logic::parse_formula("exists c. R(x, c)", sig);
  CHECK(g->variable() != "c");
  CHECK(g->body()->terms()[1].kind == Term::Kind::Variable);
  CHECK(g->body()->terms()[1].name == g->variable());
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(logic::parse_formula("P1(", k23()), ParseError);
  CHECK_THROWS_AS(logic::parse_formula("R(x)", k23()), ParseError);         // arity
  CHECK_THROWS_AS(logic::parse_formula("Foo(x)", k23()), ParseError);      // unknown relation
  CHECK_THROWS_AS(logic::parse_formula("exists x P0(x)", k23()), ParseError);  // missing dot
  CHECK_THROWS_AS(logic::parse_formula("P0(x))", k23()), ParseError);      // trailing input
  CHECK_THROWS_AS(logic::parse_formula("", k23()), ParseError);
  CHECK_THROWS_AS(logic::parse_formula("P0(x) @ P1(x)", k23()), ParseError);
  try {
    logic::parse_formula("P1(", k23());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position == 3);  // 0-based offset of the gap after '('
    CHECK(std::string(e.what()).find("position 4") != std::string::npos);
  }
}

TEST_CASE("print-parse round trip is the identity on parsed formulas") {
  const std::vector<std::string> samples = {
      "P0(x)",
      "x = y",
      "!(P0(x) & P1(x))",
      "forall x. (P0(x) | P1(x)) & !(P0(x) & P1(x))",
      "forall x. forall y. R(x, y) -> P0(x) & P1(y)",
      "exists u. R(x, u) & R(y, u)",
      "P0(x) -> P0(y) -> P0(z)",
      "forall y. P1(y) -> (exists x1. exists x2. !x1 = x2 & R(x1, y) & R(x2, y) & "
      "(forall z. R(z, y) -> (z = x1 | z = x2)))",
  };
  for (const auto& text : samples) {
    CAPTURE(text);
    const auto f = logic::parse_formula(text, k23());
    const std::string printed = logic::to_string(*f);
    const auto g = logic::parse_formula(printed, k23());
    CHECK(logic::equal(*f, *g));
    CHECK(logic::to_string(*g) == printed);
  }
}

TEST_CASE("random formulas reach a print fixed point after one parse") {
  std::mt19937 rng(20240817);
  const logic::Signature sig = testgen::random_test_signature();
  for (int i = 0; i < 200; ++i) {
    testgen::FormulaGen gen(rng, sig);
    const auto f = gen.generate({"x1", "x2", "y1"}, 3);
    const std::string s1 = logic::to_string(*f);
    const auto f2 = logic::parse_formula(s1, sig);
    const std::string s2 = logic::to_string(*f2);
    CAPTURE(s1);
    const auto f3 = logic::parse_formula(s2, sig);
    CHECK(logic::equal(*f2, *f3));
    CHECK(logic::to_string(*f3) == s2);
  }
}

TEST_CASE("structural equality distinguishes names and shapes") {
  const auto a = logic::parse_formula("P0(x)", k23());
  const auto b = logic::parse_formula("P0(y)", k23());
  const auto c = logic::parse_formula("P1(x)", k23());
  CHECK(logic::equal(*a, *logic::parse_formula("P0(x)", k23())));
  CHECK_FALSE(logic::equal(*a, *b));
  CHECK_FALSE(logic::equal(*a, *c));
}

TEST_CASE("make_partition validates cover and disjointness") {
  const auto f = logic::parse_formula("R(x, y)", k23());
  const auto part = logic::make_partition(*f, {"x"}, {"y"});
  CHECK(part.object_vars == std::vector<std::string>{"x"});
  CHECK(part.parameter_vars == std::vector<std::string>{"y"});

  CHECK_THROWS_AS(logic::make_partition(*f, {"x"}, {}), EvalError);        // y uncovered
  CHECK_THROWS_AS(logic::make_partition(*f, {"x", "y"}, {"y"}), EvalError);  // overlap
  CHECK_THROWS_AS(logic::make_partition(*f, {"x", "z"}, {"y"}), EvalError);  // z not free
  CHECK_THROWS_AS(logic::make_partition(*f, {"x", "x"}, {"y"}), EvalError);  // duplicate

  // Sentences take the empty partition.
  const auto s = logic::parse_formula("forall x. P0(x) | P1(x)", k23());
  const auto empty = logic::make_partition(*s, {}, {});
  CHECK(empty.object_vars.empty());
  CHECK(empty.parameter_vars.empty());
}
