// Minimal JSON-Schema checker covering the subset used by
// docs/report-schema.json: type (single or union), properties, required,
// additionalProperties:false, items (single schema), enum, pattern.
#pragma once

#include <regex>
#include <string>

#include <json.hpp>

namespace pfc::schemacheck {

inline bool type_matches(const std::string& t, const nlohmann::json& v) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (t == "number") return v.is_number();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  return false;
}

inline bool check(const nlohmann::json& schema, const nlohmann::json& value, std::string& why,
                  const std::string& path = "$") {
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = type_matches(t.get<std::string>(), value);
    } else {
      for (const auto& alt : t)
        if (type_matches(alt.get<std::string>(), value)) {
          ok = true;
          break;
        }
    }
    if (!ok) {
      why = path + ": type mismatch (schema " + t.dump() + ")";
      return false;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& alt : schema["enum"])
      if (alt == value) {
        ok = true;
        break;
      }
    if (!ok) {
      why = path + ": not in enum";
      return false;
    }
  }
  if (value.is_string() && schema.contains("pattern")) {
    const std::regex re(schema["pattern"].get<std::string>());
    if (!std::regex_search(value.get<std::string>(), re)) {
      why = path + ": pattern mismatch";
      return false;
    }
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const auto& req : schema["required"])
        if (!value.contains(req.get<std::string>())) {
          why = path + ": missing required field '" + req.get<std::string>() + "'";
          return false;
        }
    const bool closed =
        schema.contains("additionalProperties") && schema["additionalProperties"] == false;
    for (auto it = value.begin(); it != value.end(); ++it) {
      const bool declared =
          schema.contains("properties") && schema["properties"].contains(it.key());
      if (!declared) {
        if (closed) {
          why = path + ": unexpected field '" + it.key() + "'";
          return false;
        }
        continue;
      }
      if (!check(schema["properties"][it.key()], it.value(), why, path + "." + it.key()))
        return false;
    }
  }
  if (value.is_array() && schema.contains("items")) {
    std::size_t i = 0;
    for (const auto& item : value) {
      if (!check(schema["items"], item, why, path + "[" + std::to_string(i) + "]")) return false;
      ++i;
    }
  }
  return true;
}

}  // namespace pfc::schemacheck
