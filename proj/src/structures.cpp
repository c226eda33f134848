#include "pfc/structures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "pfc/counting.hpp"

namespace pfc::structures {

RelationTable::RelationTable(unsigned arity, std::vector<Tuple> tuples) : arity_(arity) {
  if (arity == 0) throw ConfigError("relation table: arity must be >= 1");
  for (const auto& t : tuples)
    if (t.size() != arity)
      throw ConfigError("relation table: tuple length " + std::to_string(t.size()) +
                        " does not match arity " + std::to_string(arity));
  std::sort(tuples.begin(), tuples.end());
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
  flat_.reserve(tuples.size() * arity);
  for (const auto& t : tuples) flat_.insert(flat_.end(), t.begin(), t.end());
}

bool RelationTable::contains(std::span<const Element> tuple) const {
  if (arity_ == 0 || tuple.size() != arity_) return false;
  std::size_t lo = 0, hi = tuple_count();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const Element* block = flat_.data() + mid * arity_;
    int cmp = 0;
    for (unsigned i = 0; i < arity_; ++i) {
      if (block[i] < tuple[i]) {
        cmp = -1;
        break;
      }
      if (block[i] > tuple[i]) {
        cmp = 1;
        break;
      }
    }
    if (cmp < 0)
      lo = mid + 1;
    else if (cmp > 0)
      hi = mid;
    else
      return true;
  }
  return false;
}

Tuple RelationTable::tuple_at(std::size_t i) const {
  Tuple t(arity_);
  std::copy_n(flat_.begin() + static_cast<std::ptrdiff_t>(i * arity_), arity_, t.begin());
  return t;
}

std::vector<std::string> validate_structure(const FiniteStructure& s,
                                            const logic::Signature& sig) {
  std::vector<std::string> out;
  sig.validate();
  for (const auto& [name, table] : s.relations) {
    const logic::Relation* rel = sig.find_relation(name);
    if (!rel) {
      out.push_back("relation '" + name + "' is not declared in the signature");
      continue;
    }
    if (table.arity() != rel->arity) {
      out.push_back("relation '" + name + "' has arity " + std::to_string(table.arity()) +
                    ", declared " + std::to_string(rel->arity));
      continue;
    }
    for (std::size_t i = 0; i < table.tuple_count(); ++i) {
      const Tuple t = table.tuple_at(i);
      for (Element e : t)
        if (e >= s.size) {
          std::ostringstream msg;
          msg << "relation '" << name << "' tuple (";
          for (std::size_t k = 0; k < t.size(); ++k) msg << (k ? "," : "") << t[k];
          msg << "): element " << e << " out of range for size " << s.size;
          out.push_back(msg.str());
          break;
        }
    }
  }
  for (const auto& c : sig.constants) {
    auto it = s.constants.find(c);
    if (it == s.constants.end())
      out.push_back("constant '" + c + "' is not mapped to an element");
    else if (it->second >= s.size)
      out.push_back("constant '" + c + "' maps to " + std::to_string(it->second) +
                    ", out of range for size " + std::to_string(s.size));
  }
  for (const auto& [name, e] : s.constants)
    if (!sig.has_constant(name))
      out.push_back("constant '" + name + "' is not declared in the signature");
  return out;
}

nlohmann::ordered_json structure_to_json(const FiniteStructure& s) {
  nlohmann::ordered_json j;
  j["size"] = s.size;
  nlohmann::ordered_json rels = nlohmann::ordered_json::object();
  for (const auto& [name, table] : s.relations) {
    nlohmann::ordered_json tuples = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < table.tuple_count(); ++i) tuples.push_back(table.tuple_at(i));
    rels[name] = std::move(tuples);
  }
  j["relations"] = std::move(rels);
  j["constants"] = s.constants;
  return j;
}

// --- family loading ---------------------------------------------------------

namespace {

void expect_object(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected a JSON object");
}

void reject_unknown_fields(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                           const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(ctx + ": unknown field '" + it.key() + "'");
  }
}

std::uint32_t as_u32(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_number_unsigned() || j.get<std::uint64_t>() > 0xffffffffull)
    throw ConfigError(ctx + ": expected an unsigned 32-bit integer");
  return j.get<std::uint32_t>();
}

logic::Signature signature_from_json(const nlohmann::json& j) {
  expect_object(j, "signature");
  reject_unknown_fields(j, {"relations", "constants"}, "signature");
  logic::Signature sig;
  if (j.contains("relations")) {
    if (!j["relations"].is_array()) throw ConfigError("signature.relations: expected an array");
    for (const auto& r : j["relations"]) {
      expect_object(r, "signature.relations entry");
      reject_unknown_fields(r, {"name", "arity"}, "signature.relations entry");
      if (!r.contains("name") || !r["name"].is_string() || !r.contains("arity"))
        throw ConfigError("signature.relations entry: need string 'name' and integer 'arity'");
      sig.relations.push_back({r["name"].get<std::string>(),
                               as_u32(r["arity"], "signature.relations arity")});
    }
  }
  if (j.contains("constants")) {
    if (!j["constants"].is_array()) throw ConfigError("signature.constants: expected an array");
    for (const auto& c : j["constants"]) {
      if (!c.is_string()) throw ConfigError("signature.constants: expected strings");
      sig.constants.push_back(c.get<std::string>());
    }
  }
  sig.validate();
  return sig;
}

FiniteStructure member_from_json(const nlohmann::json& j, const logic::Signature& sig,
                                 const FamilyLoadOptions& opts, const std::string& ctx) {
  expect_object(j, ctx);
  reject_unknown_fields(j, {"size", "relations", "constants"}, ctx);
  if (!j.contains("size")) throw ConfigError(ctx + ": missing 'size'");
  FiniteStructure s;
  s.size = as_u32(j["size"], ctx + ".size");
  std::size_t total_tuples = 0;
  if (j.contains("relations")) {
    expect_object(j["relations"], ctx + ".relations");
    for (auto it = j["relations"].begin(); it != j["relations"].end(); ++it) {
      const logic::Relation* rel = sig.find_relation(it.key());
      if (!rel) throw ConfigError(ctx + ": relation '" + it.key() + "' not in signature");
      if (!it.value().is_array())
        throw ConfigError(ctx + ".relations." + it.key() + ": expected an array of tuples");
      std::vector<Tuple> tuples;
      for (const auto& tj : it.value()) {
        if (!tj.is_array())
          throw ConfigError(ctx + ".relations." + it.key() + ": expected tuple arrays");
        Tuple t;
        for (const auto& e : tj) t.push_back(as_u32(e, ctx + ".relations." + it.key()));
        if (t.size() != rel->arity)
          throw ConfigError(ctx + ".relations." + it.key() + ": tuple length " +
                            std::to_string(t.size()) + " does not match arity " +
                            std::to_string(rel->arity));
        tuples.push_back(std::move(t));
      }
      total_tuples += tuples.size();
      if (total_tuples > opts.max_table_tuples)
        throw ConfigError(ctx + ": explicit member exceeds the table cap of " +
                          std::to_string(opts.max_table_tuples) + " tuples");
      s.relations.emplace(it.key(), RelationTable(rel->arity, std::move(tuples)));
    }
  }
  if (j.contains("constants")) {
    expect_object(j["constants"], ctx + ".constants");
    for (auto it = j["constants"].begin(); it != j["constants"].end(); ++it)
      s.constants[it.key()] = as_u32(it.value(), ctx + ".constants." + it.key());
  }
  const std::vector<std::string> violations = validate_structure(s, sig);
  if (!violations.empty()) throw ConfigError(ctx + ": " + violations.front());
  return s;
}

Generator generator_from_json(const nlohmann::json& j, const logic::Signature& sig,
                              const FamilyLoadOptions& opts) {
  expect_object(j, "generator");
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ConfigError("generator: missing string field 'kind'");
  const std::string kind = j["kind"].get<std::string>();

  auto require_bipartite_signature = [&]() {
    if (!(sig == k23_signature()))
      throw ConfigError("generator '" + kind +
                        "': signature must be exactly {P0/1, P1/1, R/2} with no constants");
  };

  if (kind == "k23" || kind == "pure_set" || kind == "bipartite") {
    reject_unknown_fields(j, {"kind", "params"}, "generator");
    nlohmann::json params = j.contains("params") ? j["params"] : nlohmann::json::object();
    expect_object(params, "generator.params");
    if (kind == "k23") {
      reject_unknown_fields(params, {}, "generator.params (k23)");
      require_bipartite_signature();
      return GeneratorK23{};
    }
    if (kind == "pure_set") {
      reject_unknown_fields(params, {}, "generator.params (pure_set)");
      if (!sig.relations.empty() || !sig.constants.empty())
        throw ConfigError("generator 'pure_set': signature must be empty");
      return GeneratorPureSet{};
    }
    reject_unknown_fields(params, {"p", "q"}, "generator.params (bipartite)");
    if (!params.contains("p") || !params.contains("q"))
      throw ConfigError("generator 'bipartite': params need 'p' and 'q'");
    GeneratorBipartite g{as_u32(params["p"], "generator.params.p"),
                         as_u32(params["q"], "generator.params.q")};
    if (g.p == 0 || g.q == 0) throw ConfigError("generator 'bipartite': p and q must be >= 1");
    require_bipartite_signature();
    return g;
  }
  if (kind == "table") {
    reject_unknown_fields(j, {"kind", "members"}, "generator");
    if (!j.contains("members")) throw ConfigError("generator 'table': missing 'members'");
    expect_object(j["members"], "generator.members");
    GeneratorTable g;
    for (auto it = j["members"].begin(); it != j["members"].end(); ++it) {
      std::uint32_t index = 0;
      try {
        std::size_t used = 0;
        unsigned long v = std::stoul(it.key(), &used);
        if (used != it.key().size() || v == 0 || v > 0xfffffffful) throw std::invalid_argument("");
        index = static_cast<std::uint32_t>(v);
      } catch (...) {
        throw ConfigError("generator.members: key '" + it.key() +
                          "' is not a positive integer index");
      }
      g.members.emplace(index, member_from_json(it.value(), sig, opts,
                                                "generator.members[" + it.key() + "]"));
    }
    if (g.members.empty()) throw ConfigError("generator 'table': no members");
    return g;
  }
  throw ConfigError("generator: unknown kind '" + kind + "'");
}

// Explicit-table members must not shrink as the index grows; generated
// builtins satisfy this by construction.
void check_sizes_nondecreasing(const GeneratorTable& table) {
  std::uint32_t prev = 0;
  for (const auto& [index, member] : table.members) {
    if (member.size < prev)
      throw ConfigError("generator.members: member size decreases at index " +
                        std::to_string(index));
    prev = member.size;
  }
}

}  // namespace

FamilySpec family_from_json(const nlohmann::json& j, const FamilyLoadOptions& opts) {
  expect_object(j, "family spec");
  reject_unknown_fields(j, {"signature", "generator", "index_domain"}, "family spec");
  for (const char* field : {"signature", "generator", "index_domain"})
    if (!j.contains(field))
      throw ConfigError(std::string("family spec: missing field '") + field + "'");

  FamilySpec spec;
  spec.signature = signature_from_json(j["signature"]);
  spec.generator = generator_from_json(j["generator"], spec.signature, opts);

  const auto& dom = j["index_domain"];
  if (!dom.is_array() || dom.size() != 2)
    throw ConfigError("index_domain: expected [lo, hi]");
  spec.index_domain.lo = as_u32(dom[0], "index_domain.lo");
  spec.index_domain.hi = as_u32(dom[1], "index_domain.hi");
  if (spec.index_domain.lo == 0 || spec.index_domain.lo > spec.index_domain.hi)
    throw ConfigError("index_domain: need 1 <= lo <= hi");

  if (const auto* table = std::get_if<GeneratorTable>(&spec.generator)) {
    for (const auto& [index, member] : table->members)
      if (!spec.index_domain.contains(index))
        throw ConfigError("generator.members: index " + std::to_string(index) +
                          " outside index_domain");
    check_sizes_nondecreasing(*table);
  }
  return spec;
}

FamilySpec load_family(const std::string& path, const FamilyLoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open family spec '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("family spec '" + path + "': " + e.what());
  }
  return family_from_json(j, opts);
}

namespace {

FiniteStructure build_bipartite(std::uint32_t index, unsigned p, unsigned q) {
  FiniteStructure s;
  const std::uint32_t block = p + q;
  s.size = block * index;
  std::vector<Tuple> p0, p1, r;
  for (std::uint32_t k = 0; k < index; ++k) {
    const Element base = block * k;
    for (unsigned i = 0; i < p; ++i) p0.push_back({base + i});
    for (unsigned j = 0; j < q; ++j) p1.push_back({base + p + j});
    for (unsigned i = 0; i < p; ++i)
      for (unsigned j = 0; j < q; ++j) r.push_back({base + i, base + p + j});
  }
  s.relations.emplace("P0", RelationTable(1, std::move(p0)));
  s.relations.emplace("P1", RelationTable(1, std::move(p1)));
  s.relations.emplace("R", RelationTable(2, std::move(r)));
  return s;
}

}  // namespace

FiniteStructure build_member(const FamilySpec& family, std::uint32_t index) {
  if (!family.index_domain.contains(index))
    throw ConfigError("index " + std::to_string(index) + " outside the family's index_domain [" +
                      std::to_string(family.index_domain.lo) + ", " +
                      std::to_string(family.index_domain.hi) + "]");
  return std::visit(
      [&](const auto& g) -> FiniteStructure {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, GeneratorK23>) {
          return build_bipartite(index, 2, 3);
        } else if constexpr (std::is_same_v<T, GeneratorBipartite>) {
          return build_bipartite(index, g.p, g.q);
        } else if constexpr (std::is_same_v<T, GeneratorPureSet>) {
          FiniteStructure s;
          s.size = index;
          return s;
        } else {
          auto it = g.members.find(index);
          if (it == g.members.end())
            throw ConfigError("table family has no member at index " + std::to_string(index));
          return it->second;
        }
      },
      family.generator);
}

logic::Signature k23_signature() {
  return logic::Signature{{{"P0", 1}, {"P1", 1}, {"R", 2}}, {}};
}

const std::vector<std::string>& k23_axiom_texts() {
  static const std::vector<std::string> axioms = {
      // P0 and P1 partition the universe.
      "forall x. (P0(x) | P1(x)) & !(P0(x) & P1(x))",
      // R runs from P0 to P1.
      "forall x. forall y. R(x, y) -> P0(x) & P1(y)",
      // Every source has exactly three targets.
      "forall x. P0(x) -> (exists y1. exists y2. exists y3. "
      "(!y1 = y2 & !y1 = y3 & !y2 = y3) & R(x, y1) & R(x, y2) & R(x, y3) & "
      "(forall z. R(x, z) -> (z = y1 | z = y2 | z = y3)))",
      // Every target has exactly two sources.
      "forall y. P1(y) -> (exists x1. exists x2. "
      "!x1 = x2 & R(x1, y) & R(x2, y) & (forall z. R(z, y) -> (z = x1 | z = x2)))",
      // Sources sharing a target share all targets.
      "forall x. forall u. forall y. forall w. (R(x, y) & R(u, y) & R(x, w)) -> R(u, w)",
  };
  return axioms;
}

std::vector<logic::FormulaPtr> k23_axioms() {
  const logic::Signature sig = k23_signature();
  std::vector<logic::FormulaPtr> out;
  out.reserve(k23_axiom_texts().size());
  for (const auto& text : k23_axiom_texts()) out.push_back(logic::parse_formula(text, sig));
  return out;
}

std::vector<bool> check_axioms(const FiniteStructure& s,
                               const std::vector<logic::FormulaPtr>& sentences) {
  std::vector<bool> out;
  out.reserve(sentences.size());
  for (const auto& f : sentences) {
    if (!logic::is_sentence(*f))
      throw EvalError("check_axioms: '" + logic::to_string(*f) + "' is not a sentence");
    out.push_back(counting::evaluate(s, *f, {}));
  }
  return out;
}

}  // namespace pfc::structures
