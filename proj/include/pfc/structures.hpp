#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pfc/errors.hpp"
#include "pfc/logic.hpp"

namespace pfc::structures {

using Element = std::uint32_t;
using Tuple = std::vector<Element>;

// Sorted flat block storage for one relation's tuple set; membership is a
// binary search over lexicographically ordered blocks.
class RelationTable {
 public:
  RelationTable() = default;
  RelationTable(unsigned arity, std::vector<Tuple> tuples);  // sorts and dedupes

  unsigned arity() const { return arity_; }
  std::size_t tuple_count() const { return arity_ ? flat_.size() / arity_ : 0; }
  bool contains(std::span<const Element> tuple) const;
  Tuple tuple_at(std::size_t i) const;
  const std::vector<Element>& flat() const { return flat_; }

  bool operator==(const RelationTable&) const = default;

 private:
  unsigned arity_ = 0;
  std::vector<Element> flat_;
};

// Finite structure over universe {0, ..., size-1}.
struct FiniteStructure {
  std::uint32_t size = 0;
  std::map<std::string, RelationTable> relations;
  std::map<std::string, Element> constants;

  bool operator==(const FiniteStructure&) const = default;
};

// Checks tables and constants against the signature: declared symbols only,
// matching arities, all elements in range, every declared constant mapped.
// Returns human-readable violations; empty means valid.
std::vector<std::string> validate_structure(const FiniteStructure& s,
                                            const logic::Signature& sig);

nlohmann::ordered_json structure_to_json(const FiniteStructure& s);

// --- families -------------------------------------------------------------

// Builtin generators. Index n of the bipartite generator is n disjoint blocks
// of p+q elements: block k occupies [(p+q)k, (p+q)(k+1)), its first p
// elements satisfy P0, the remaining q satisfy P1, and R holds on all p*q
// source/target pairs inside the block. The k23 generator is bipartite with
// p=2, q=3 (so index n has size 5n, |P0| = 2n, |P1| = 3n, |R| = 6n).
struct GeneratorK23 {
  bool operator==(const GeneratorK23&) const = default;
};
struct GeneratorPureSet {  // index n is the bare n-element set
  bool operator==(const GeneratorPureSet&) const = default;
};
struct GeneratorBipartite {
  unsigned p = 2, q = 3;
  bool operator==(const GeneratorBipartite&) const = default;
};
struct GeneratorTable {  // explicit members keyed by index
  std::map<std::uint32_t, FiniteStructure> members;
  bool operator==(const GeneratorTable&) const = default;
};
using Generator = std::variant<GeneratorK23, GeneratorPureSet, GeneratorBipartite, GeneratorTable>;

struct IndexRange {
  std::uint32_t lo = 1, hi = 1;
  bool contains(std::uint32_t i) const { return lo <= i && i <= hi; }
  bool operator==(const IndexRange&) const = default;
};

struct FamilySpec {
  logic::Signature signature;
  Generator generator;
  IndexRange index_domain;
};

struct FamilyLoadOptions {
  std::size_t max_table_tuples = 1'000'000;  // per explicit member
};

// Family-spec JSON:
//   { "signature":    { "relations": [{"name": ..., "arity": ...}, ...],
//                       "constants": [...] },
//     "generator":    { "kind": "k23" | "pure_set" | "bipartite", "params": {...} }
//                   | { "kind": "table", "members": { "<index>": <member>, ... } },
//     "index_domain": [lo, hi] }
// Member: { "size": N, "relations": {"R": [[...], ...], ...}, "constants": {"c": e} }.
// Field names are fixed; unknown fields are rejected. Explicit members are
// validated against the signature and capped at max_table_tuples tuples.
FamilySpec family_from_json(const nlohmann::json& j, const FamilyLoadOptions& opts = {});
FamilySpec load_family(const std::string& path, const FamilyLoadOptions& opts = {});

// Builds the member at `index`. Pure: repeated calls yield identical
// structures. Throws ConfigError when index is outside index_domain.
FiniteStructure build_member(const FamilySpec& family, std::uint32_t index);

// P0, P1 unary and R binary — the vocabulary of the bipartite builtins.
logic::Signature k23_signature();

// The defining sentences of the k23 family: P0/P1 partition the universe, R
// runs from P0 to P1, every source has exactly three targets, every target
// exactly two sources, and R is closed under exchanging targets between
// sources that share one.
const std::vector<std::string>& k23_axiom_texts();
std::vector<logic::FormulaPtr> k23_axioms();

// Evaluates each sentence on s (all must be sentences; throws EvalError).
std::vector<bool> check_axioms(const FiniteStructure& s,
                               const std::vector<logic::FormulaPtr>& sentences);

}  // namespace pfc::structures
