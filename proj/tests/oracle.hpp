// Independent brute-force evaluation oracle: recursive Tarski semantics with
// std::set tuple lookup, sharing no code with the compiled evaluation path.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pfc/logic.hpp"
#include "pfc/numbers.hpp"
#include "pfc/structures.hpp"

namespace pfc::oracle {

struct SetStructure {
  std::uint32_t size = 0;
  std::map<std::string, std::set<structures::Tuple>> relations;
  std::map<std::string, structures::Element> constants;
};

inline SetStructure make_set_structure(const structures::FiniteStructure& s) {
  SetStructure out;
  out.size = s.size;
  out.constants = s.constants;
  for (const auto& [name, table] : s.relations) {
    std::set<structures::Tuple>& tuples = out.relations[name];
    for (std::size_t i = 0; i < table.tuple_count(); ++i) tuples.insert(table.tuple_at(i));
  }
  return out;
}

using Env = std::map<std::string, structures::Element>;

inline structures::Element term_value(const logic::Term& t, const SetStructure& s,
                                      const Env& env) {
  if (t.kind == logic::Term::Kind::Constant) return s.constants.at(t.name);
  return env.at(t.name);
}

inline bool naive_eval(const SetStructure& s, const logic::Formula& f, Env& env) {
  using K = logic::Formula::Kind;
  switch (f.kind()) {
    case K::Atom: {
      structures::Tuple t;
      for (const auto& term : f.terms()) t.push_back(term_value(term, s, env));
      const auto it = s.relations.find(f.relation());
      return it != s.relations.end() && it->second.count(t) > 0;
    }
    case K::Equality:
      return term_value(f.terms()[0], s, env) == term_value(f.terms()[1], s, env);
    case K::Not:
      return !naive_eval(s, *f.body(), env);
    case K::And: {
      const bool a = naive_eval(s, *f.lhs(), env);
      const bool b = naive_eval(s, *f.rhs(), env);
      return a && b;
    }
    case K::Or: {
      const bool a = naive_eval(s, *f.lhs(), env);
      const bool b = naive_eval(s, *f.rhs(), env);
      return a || b;
    }
    case K::Implies: {
      const bool a = naive_eval(s, *f.lhs(), env);
      const bool b = naive_eval(s, *f.rhs(), env);
      return !a || b;
    }
    case K::ForAll:
    case K::Exists: {
      const std::string& v = f.variable();
      std::optional<structures::Element> saved;
      if (const auto it = env.find(v); it != env.end()) saved = it->second;
      bool result = f.kind() == K::ForAll;
      for (std::uint32_t e = 0; e < s.size; ++e) {
        env[v] = e;
        const bool here = naive_eval(s, *f.body(), env);
        if (f.kind() == K::ForAll ? !here : here) {
          result = f.kind() != K::ForAll;
          break;
        }
      }
      if (saved)
        env[v] = *saved;
      else
        env.erase(v);
      return result;
    }
  }
  return false;
}

// Counts assignments of `vars` (in order, odometer enumeration) satisfying f,
// with `fixed` pre-bound.
inline Natural naive_count(const structures::FiniteStructure& s, const logic::Formula& f,
                           const std::vector<std::string>& vars, const Env& fixed = {}) {
  const SetStructure ss = make_set_structure(s);
  Env env = fixed;
  Natural total = 0;
  const auto recurse = [&](const auto& self, std::size_t at) -> void {
    if (at == vars.size()) {
      if (naive_eval(ss, f, env)) ++total;
      return;
    }
    for (std::uint32_t e = 0; e < s.size; ++e) {
      env[vars[at]] = e;
      self(self, at + 1);
    }
    env.erase(vars[at]);
  };
  recurse(recurse, 0);
  return total;
}

}  // namespace pfc::oracle
