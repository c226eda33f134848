#include <doctest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "generators.hpp"
#include "pfc/errors.hpp"
#include "pfc/logic.hpp"
#include "pfc/structures.hpp"

using namespace pfc;
using structures::Element;
using structures::FamilySpec;
using structures::FiniteStructure;
using structures::RelationTable;
using structures::Tuple;

namespace {

std::string src_path(const std::string& rel) {
  return std::string(PFC_SOURCE_DIR) + "/" + rel;
}

FamilySpec k23_family() {
  return FamilySpec{structures::k23_signature(), structures::GeneratorK23{}, {1, 1024}};
}

}  // namespace

TEST_CASE("relation table sorts, dedupes, and answers membership") {
  RelationTable t(2, {{3, 1}, {0, 2}, {3, 1}, {0, 1}, {0, 2}});
  CHECK(t.arity() == 2);
  CHECK(t.tuple_count() == 3);
  CHECK(t.tuple_at(0) == Tuple{0, 1});
  CHECK(t.tuple_at(1) == Tuple{0, 2});
  CHECK(t.tuple_at(2) == Tuple{3, 1});
  CHECK(t.flat() == std::vector<Element>{0, 1, 0, 2, 3, 1});

  const Tuple yes{3, 1}, no{1, 3};
  CHECK(t.contains(yes));
  CHECK_FALSE(t.contains(no));

  CHECK(t == RelationTable(2, {{0, 1}, {0, 2}, {3, 1}}));
  CHECK(RelationTable().tuple_count() == 0);
}

TEST_CASE("relation table agrees with a set oracle on random data") {
  std::mt19937 rng(424242);
  for (int trial = 0; trial < 50; ++trial) {
    const unsigned arity = 1 + testgen::pick_uint(rng, 0, 2);
    const Element bound = 2 + static_cast<Element>(testgen::pick_uint(rng, 0, 5));
    std::vector<Tuple> raw;
    std::set<Tuple> oracle;
    const std::size_t n = testgen::pick_uint(rng, 0, 40);
    for (std::size_t i = 0; i < n; ++i) {
      Tuple t(arity);
      for (auto& e : t) e = static_cast<Element>(testgen::pick_uint(rng, 0, bound - 1));
      raw.push_back(t);
      oracle.insert(t);
    }
    RelationTable table(arity, raw);
    REQUIRE(table.tuple_count() == oracle.size());
    std::size_t i = 0;
    for (const auto& t : oracle) {  // std::set iterates in sorted order
      CHECK(table.tuple_at(i) == t);
      CHECK(table.contains(t));
      ++i;
    }
    // Probe some non-members.
    for (int probe = 0; probe < 20; ++probe) {
      Tuple t(arity);
      for (auto& e : t) e = static_cast<Element>(testgen::pick_uint(rng, 0, bound));
      CHECK(table.contains(t) == (oracle.count(t) > 0));
    }
  }
}

TEST_CASE("k23 members have the documented block layout") {
  const FamilySpec fam = k23_family();
  for (std::uint32_t n = 1; n <= 12; ++n) {
    const FiniteStructure s = structures::build_member(fam, n);
    CAPTURE(n);
    CHECK(s.size == 5 * n);
    CHECK(s.relations.at("P0").tuple_count() == 2 * n);
    CHECK(s.relations.at("P1").tuple_count() == 3 * n);
    CHECK(s.relations.at("R").tuple_count() == 6 * n);
    CHECK(s.constants.empty());
    CHECK(structures::validate_structure(s, fam.signature).empty());
    for (std::uint32_t k = 0; k < n; ++k) {
      const Element base = 5 * k;
      for (Element i = 0; i < 2; ++i) {
        const Tuple p0{base + i};
        CHECK(s.relations.at("P0").contains(p0));
        for (Element j = 2; j < 5; ++j) {
          const Tuple edge{base + i, base + j};
          CHECK(s.relations.at("R").contains(edge));
        }
      }
      for (Element j = 2; j < 5; ++j) {
        const Tuple p1{base + j};
        CHECK(s.relations.at("P1").contains(p1));
      }
    }
  }
  // Building the same index twice yields identical structures.
  CHECK(structures::build_member(fam, 7) == structures::build_member(fam, 7));
  CHECK_THROWS_AS(structures::build_member(fam, 0), ConfigError);
  CHECK_THROWS_AS(structures::build_member(fam, 1025), ConfigError);
}

TEST_CASE("bipartite generator generalizes the block layout") {
  FamilySpec fam{structures::k23_signature(), structures::GeneratorBipartite{3, 4}, {1, 64}};
  for (std::uint32_t n : {1u, 2u, 5u}) {
    const FiniteStructure s = structures::build_member(fam, n);
    CHECK(s.size == 7 * n);
    CHECK(s.relations.at("P0").tuple_count() == 3 * n);
    CHECK(s.relations.at("P1").tuple_count() == 4 * n);
    CHECK(s.relations.at("R").tuple_count() == 12 * n);
    CHECK(structures::validate_structure(s, fam.signature).empty());
  }
  const FiniteStructure one = structures::build_member(fam, 1);
  CHECK(one.relations.at("P0").contains(Tuple{2}));
  CHECK(one.relations.at("P1").contains(Tuple{3}));
  CHECK(one.relations.at("R").contains(Tuple{0, 6}));
  CHECK_FALSE(one.relations.at("R").contains(Tuple{3, 0}));
}

TEST_CASE("pure set generator produces bare universes") {
  FamilySpec fam{logic::Signature{}, structures::GeneratorPureSet{}, {1, 4096}};
  const FiniteStructure s = structures::build_member(fam, 9);
  CHECK(s.size == 9);
  CHECK(s.relations.empty());
  CHECK(s.constants.empty());
}

TEST_CASE("structure validation reports each violation") {
  const auto sig = structures::k23_signature();
  const FamilySpec fam = k23_family();
  FiniteStructure s = structures::build_member(fam, 1);
  CHECK(structures::validate_structure(s, sig).empty());

  SUBCASE("element out of range") {
    s.relations["P0"] = RelationTable(1, {{99}});
    CHECK_FALSE(structures::validate_structure(s, sig).empty());
  }
  SUBCASE("undeclared relation") {
    s.relations["Q"] = RelationTable(1, {{0}});
    CHECK_FALSE(structures::validate_structure(s, sig).empty());
  }
  SUBCASE("arity mismatch") {
    s.relations["R"] = RelationTable(1, {{0}});
    CHECK_FALSE(structures::validate_structure(s, sig).empty());
  }
  SUBCASE("undeclared constant") {
    s.constants["c"] = 0;
    CHECK_FALSE(structures::validate_structure(s, sig).empty());
  }
  SUBCASE("missing declared constant") {
    logic::Signature with_const = sig;
    with_const.constants.push_back("c");
    CHECK_FALSE(structures::validate_structure(s, with_const).empty());
    s.constants["c"] = 3;
    CHECK(structures::validate_structure(s, with_const).empty());
    s.constants["c"] = 5;  // size is 5, so 5 is out of range
    CHECK_FALSE(structures::validate_structure(s, with_const).empty());
  }
}

TEST_CASE("k23 axioms hold on every generated member") {
  const FamilySpec fam = k23_family();
  const auto axioms = structures::k23_axioms();
  REQUIRE(axioms.size() == 5);
  for (std::uint32_t n : {1u, 2u, 3u, 8u}) {
    const auto s = structures::build_member(fam, n);
    const auto results = structures::check_axioms(s, axioms);
    REQUIRE(results.size() == 5);
    for (std::size_t i = 0; i < results.size(); ++i) {
      CAPTURE(n);
      CAPTURE(i);
      CHECK(results[i]);
    }
  }

  // Degree axioms fail once an edge is dropped.
  FiniteStructure broken = structures::build_member(fam, 1);
  std::vector<Tuple> edges;
  for (std::size_t i = 1; i < broken.relations.at("R").tuple_count(); ++i)
    edges.push_back(broken.relations.at("R").tuple_at(i));
  broken.relations["R"] = RelationTable(2, edges);
  const auto results = structures::check_axioms(broken, axioms);
  CHECK_FALSE(results[2]);  // some source no longer has three targets

  // Non-sentences are rejected.
  const auto open = logic::parse_formula("P0(x)", fam.signature);
  std::vector<logic::FormulaPtr> bad;
  bad.push_back(logic::parse_formula("forall x. P0(x) | P1(x)", fam.signature));
  bad.push_back(open);
  CHECK_THROWS_AS(structures::check_axioms(broken, bad), EvalError);
}

TEST_CASE("axiom texts parse to the built-in formulas") {
  const auto& texts = structures::k23_axiom_texts();
  const auto axioms = structures::k23_axioms();
  REQUIRE(texts.size() == axioms.size());
  const auto sig = structures::k23_signature();
  for (std::size_t i = 0; i < texts.size(); ++i) {
    CAPTURE(texts[i]);
    const auto parsed = logic::parse_formula(texts[i], sig);
    CHECK(logic::equal(*parsed, *axioms[i]));
    CHECK(logic::is_sentence(*axioms[i]));
  }
}

TEST_CASE("shipped axiom file matches the built-in texts") {
  std::ifstream in(src_path("families/k23_axioms.fol"));
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  const auto& texts = structures::k23_axiom_texts();
  REQUIRE(lines.size() == texts.size());
  for (std::size_t i = 0; i < lines.size(); ++i) CHECK(lines[i] == texts[i]);
}

TEST_CASE("family specs load from json") {
  const auto k23 = structures::load_family(src_path("families/k23.json"));
  CHECK(k23.signature == structures::k23_signature());
  CHECK(std::holds_alternative<structures::GeneratorK23>(k23.generator));
  CHECK(k23.index_domain == structures::IndexRange{1, 1024});

  const auto pure = structures::load_family(src_path("families/pure_set.json"));
  CHECK(pure.signature.relations.empty());
  CHECK(std::holds_alternative<structures::GeneratorPureSet>(pure.generator));

  const auto bip = structures::load_family(src_path("families/bipartite_3_4.json"));
  const auto* g = std::get_if<structures::GeneratorBipartite>(&bip.generator);
  REQUIRE(g != nullptr);
  CHECK(g->p == 3);
  CHECK(g->q == 4);

  const auto alt = structures::load_family(src_path("families/alternating.json"));
  CHECK(alt.index_domain == structures::IndexRange{1, 8});
  const auto* table = std::get_if<structures::GeneratorTable>(&alt.generator);
  REQUIRE(table != nullptr);
  CHECK(table->members.size() == 8);
  CHECK(structures::build_member(alt, 3).size == 3);
  CHECK(structures::build_member(alt, 3).relations.at("Q").tuple_count() == 1);
  CHECK(structures::build_member(alt, 4).relations.at("Q").tuple_count() == 0);

  CHECK_THROWS_AS(structures::load_family(src_path("families/nope.json")), Error);
}

TEST_CASE("family json rejects malformed specs") {
  using nlohmann::json;
  const char* good = R"({
    "signature": {"relations": [{"name": "Q", "arity": 1}], "constants": []},
    "generator": {"kind": "table", "members": {"1": {"size": 2, "relations": {"Q": [[0]]}}}},
    "index_domain": [1, 1]
  })";
  CHECK_NOTHROW(structures::family_from_json(json::parse(good)));

  auto mutate = [&](auto&& f) {
    json j = json::parse(good);
    f(j);
    return j;
  };

  CHECK_THROWS_AS(structures::family_from_json(mutate([](json& j) { j["extra"] = 1; })),
                  ConfigError);
  CHECK_THROWS_AS(
      structures::family_from_json(mutate([](json& j) { j["generator"]["kind"] = "mystery"; })),
      ConfigError);
  CHECK_THROWS_AS(
      structures::family_from_json(mutate([](json& j) { j["index_domain"] = {0, 4}; })),
      ConfigError);
  CHECK_THROWS_AS(
      structures::family_from_json(mutate([](json& j) { j["index_domain"] = {3, 2}; })),
      ConfigError);
  CHECK_THROWS_AS(
      structures::family_from_json(mutate([](json& j) { j["index_domain"] = {1, 2, 3}; })),
      ConfigError);
  CHECK_THROWS_AS(structures::family_from_json(mutate([](json& j) { j.erase("signature"); })),
                  ConfigError);
  // Table keys must be positive integers.
  CHECK_THROWS_AS(structures::family_from_json(mutate([](json& j) {
                    j["generator"]["members"] = {{"0", {{"size", 1}}}};
                  })),
                  ConfigError);
  CHECK_THROWS_AS(structures::family_from_json(mutate([](json& j) {
                    j["generator"]["members"] = {{"x", {{"size", 1}}}};
                  })),
                  ConfigError);
  // Member that violates the signature (arity mismatch) is rejected at load.
  CHECK_THROWS_AS(structures::family_from_json(mutate([](json& j) {
                    j["generator"]["members"]["1"]["relations"]["Q"] = {{0, 1}};
                  })),
                  ConfigError);
  // Unknown member field.
  CHECK_THROWS_AS(structures::family_from_json(mutate([](json& j) {
                    j["generator"]["members"]["1"]["bogus"] = 1;
                  })),
                  ConfigError);

  // Sizes must be nondecreasing in the index.
  const char* shrinking = R"({
    "signature": {"relations": [], "constants": []},
    "generator": {"kind": "table", "members": {
      "1": {"size": 3}, "2": {"size": 2}}},
    "index_domain": [1, 2]
  })";
  CHECK_THROWS_AS(structures::family_from_json(json::parse(shrinking)), ConfigError);

  // Builtin structured generators insist on their vocabulary.
  const char* wrong_sig = R"({
    "signature": {"relations": [{"name": "Q", "arity": 1}], "constants": []},
    "generator": {"kind": "k23"},
    "index_domain": [1, 4]
  })";
  CHECK_THROWS_AS(structures::family_from_json(json::parse(wrong_sig)), ConfigError);
  const char* pure_with_rel = R"({
    "signature": {"relations": [{"name": "Q", "arity": 1}], "constants": []},
    "generator": {"kind": "pure_set"},
    "index_domain": [1, 4]
  })";
  CHECK_THROWS_AS(structures::family_from_json(json::parse(pure_with_rel)), ConfigError);

  // Per-member tuple cap.
  structures::FamilyLoadOptions tight;
  tight.max_table_tuples = 0;
  CHECK_THROWS_AS(structures::family_from_json(json::parse(good), tight), ConfigError);
}

TEST_CASE("structure json round-trips through a table member") {
  const auto member = structures::build_member(k23_family(), 2);
  const auto j = structures::structure_to_json(member);

  nlohmann::json fam_json = nlohmann::json::parse(R"({
    "signature": {"relations": [{"name": "P0", "arity": 1}, {"name": "P1", "arity": 1},
                                {"name": "R", "arity": 2}],
                  "constants": []},
    "generator": {"kind": "table", "members": {}},
    "index_domain": [1, 1]
  })");
  fam_json["generator"]["members"]["1"] = nlohmann::json::parse(j.dump());

  const auto fam = structures::family_from_json(fam_json);
  CHECK(structures::build_member(fam, 1) == member);
}
