#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "pfc/analysis.hpp"

namespace pfc::analysis {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

template <typename T, typename F>
std::vector<std::string> map_strings(const std::vector<T>& xs, F f) {
  std::vector<std::string> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(f(x));
  return out;
}

std::string index_list(const std::vector<std::uint32_t>& xs) {
  if (xs.empty()) return "(none)";
  return join(map_strings(xs, [](std::uint32_t i) { return std::to_string(i); }), " ");
}

std::string tuple_string(const structures::Tuple& t) {
  return "(" +
         join(map_strings(t, [](std::uint32_t e) { return std::to_string(e); }), ", ") + ")";
}

// Right-aligned columns, two spaces apart, one line per row.
std::string render_columns(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c)
      widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += "  ";
      out += std::string(widths[c] - row[c].size(), ' ');
      out += row[c];
    }
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json poly_or_null(const std::optional<polynomials::RationalPolynomial>& p) {
  if (!p) return nullptr;
  return polynomials::to_string(*p);
}

nlohmann::ordered_json degree_or_null(const std::optional<polynomials::RationalPolynomial>& p) {
  if (!p || !p->degree()) return nullptr;
  return *p->degree();
}

}  // namespace

nlohmann::ordered_json mec_report_json(const MecReport& r) {
  nlohmann::ordered_json j;
  j["formula"] = r.formula;
  j["object"] = r.object_vars;
  j["param"] = r.parameter_vars;
  j["indices"] = r.indices;
  j["skipped"] = r.skipped;
  j["q"] = map_strings(r.q_values, [](const Natural& q) { return pfc::to_string(q); });
  j["class_counts"] = r.class_counts;
  j["class_count_stable"] = r.class_count_stable;
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const MecClass& cls : r.classes) {
    nlohmann::ordered_json c;
    c["polynomial"] = poly_or_null(cls.poly);
    c["degree"] = degree_or_null(cls.poly);
    c["positive_lead"] = cls.positive_lead;
    c["cardinalities"] =
        map_strings(cls.cardinalities, [](const Natural& n) { return pfc::to_string(n); });
    c["class_sizes"] =
        map_strings(cls.class_sizes, [](const Natural& n) { return pfc::to_string(n); });
    c["witness"] = cls.witness;
    classes.push_back(std::move(c));
  }
  j["classes"] = std::move(classes);
  j["all_fitted"] = r.all_fitted;
  j["leads_ok"] = r.leads_ok;
  return j;
}

std::string mec_report_table(const MecReport& r, bool full) {
  std::ostringstream out;
  out << "formula: " << r.formula << '\n';
  out << "object vars: " << (r.object_vars.empty() ? "(none)" : join(r.object_vars, " "))
      << '\n';
  out << "parameter vars: "
      << (r.parameter_vars.empty() ? "(none)" : join(r.parameter_vars, " ")) << '\n';
  out << "usable indices: " << index_list(r.indices) << '\n';
  out << "skipped indices: " << index_list(r.skipped) << '\n';
  out << "q values: "
      << join(map_strings(r.q_values, [](const Natural& q) { return pfc::to_string(q); }), " ")
      << '\n';
  out << "class counts: "
      << join(map_strings(r.class_counts,
                          [](std::size_t c) { return std::to_string(c); }),
              " ")
      << (r.class_count_stable ? " (stable)" : " (unstable)") << '\n';
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    const MecClass& cls = r.classes[i];
    out << "class " << i << ": ";
    if (cls.poly) {
      out << "F(q) = " << polynomials::to_string(*cls.poly) << ", degree = "
          << (cls.poly->degree() ? std::to_string(*cls.poly->degree()) : std::string("-"))
          << (cls.positive_lead ? ", lead ok" : ", lead negative");
    } else {
      out << "unfitted";
    }
    out << ", witness = " << tuple_string(cls.witness) << '\n';
  }
  out << "all fitted: " << yes_no(r.all_fitted) << '\n';
  out << "leads ok: " << yes_no(r.leads_ok) << '\n';
  if (full && r.class_count_stable && !r.classes.empty()) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> head = {"index", "q"};
    for (std::size_t i = 0; i < r.classes.size(); ++i) {
      head.push_back("card" + std::to_string(i));
      head.push_back("size" + std::to_string(i));
    }
    rows.push_back(std::move(head));
    for (std::size_t j = 0; j < r.indices.size(); ++j) {
      std::vector<std::string> row = {std::to_string(r.indices[j]),
                                      pfc::to_string(r.q_values[j])};
      for (const MecClass& cls : r.classes) {
        row.push_back(pfc::to_string(cls.cardinalities[j]));
        row.push_back(pfc::to_string(cls.class_sizes[j]));
      }
      rows.push_back(std::move(row));
    }
    out << render_columns(rows);
  }
  return out.str();
}

std::string mec_report_csv(const MecReport& r) {
  std::ostringstream out;
  out << "index,q";
  for (std::size_t i = 0; i < r.classes.size(); ++i) out << ",class" << i;
  out << '\n';
  for (std::size_t j = 0; j < r.indices.size(); ++j) {
    out << r.indices[j] << ',' << pfc::to_string(r.q_values[j]);
    for (const MecClass& cls : r.classes) out << ',' << pfc::to_string(cls.cardinalities[j]);
    out << '\n';
  }
  return out.str();
}

nlohmann::ordered_json ndim_report_json(const NDimReport& r) {
  nlohmann::ordered_json j;
  j["N"] = r.N;
  j["universe_polynomial"] = polynomials::to_string(r.universe_poly);
  j["indices"] = r.indices;
  j["skipped"] = r.skipped;
  j["rel_tol"] = r.rel_tol;
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const NDimEntry& e : r.entries) {
    nlohmann::ordered_json c;
    c["mu"] = e.mu;
    c["mu_exact"] = e.mu_exact ? nlohmann::ordered_json(pfc::to_string(*e.mu_exact))
                               : nlohmann::ordered_json(nullptr);
    c["d"] = e.d;
    c["errors"] = e.errors;
    classes.push_back(std::move(c));
  }
  j["classes"] = std::move(classes);
  j["pass"] = r.pass;
  return j;
}

std::string ndim_report_table(const NDimReport& r) {
  std::ostringstream out;
  out << "universe polynomial: " << polynomials::to_string(r.universe_poly) << '\n';
  out << "N: " << r.N << '\n';
  out << "usable indices: " << index_list(r.indices) << '\n';
  out << "skipped indices: " << index_list(r.skipped) << '\n';
  out << "rel tol: " << fmt_double(r.rel_tol) << '\n';
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    const NDimEntry& e = r.entries[i];
    out << "class " << i << ": mu = " << fmt_double(e.mu);
    if (e.mu_exact) out << " (exact " << pfc::to_string(*e.mu_exact) << ")";
    out << ", d = " << e.d << ", errors:";
    for (double err : e.errors) out << ' ' << fmt_double(err);
    out << '\n';
  }
  out << "pass: " << yes_no(r.pass) << '\n';
  return out.str();
}

std::string ndim_report_csv(const NDimReport& r) {
  std::ostringstream out;
  out << "index";
  for (std::size_t i = 0; i < r.entries.size(); ++i) out << ",class" << i << "_error";
  out << '\n';
  for (std::size_t j = 0; j < r.indices.size(); ++j) {
    out << r.indices[j];
    for (const NDimEntry& e : r.entries) out << ',' << fmt_double(e.errors[j]);
    out << '\n';
  }
  return out.str();
}

nlohmann::ordered_json zero_one_json(const std::vector<std::uint32_t>& indices,
                                     const std::vector<ZeroOneResult>& results) {
  nlohmann::ordered_json j;
  j["indices"] = indices;
  nlohmann::ordered_json sentences = nlohmann::ordered_json::array();
  for (const ZeroOneResult& r : results) {
    nlohmann::ordered_json s;
    s["sentence"] = r.sentence;
    s["values"] = r.values;
    s["stabilized"] = r.stabilized;
    s["value"] = r.value;
    s["first_stable_index"] = r.stabilized ? nlohmann::ordered_json(r.first_stable_index)
                                           : nlohmann::ordered_json(nullptr);
    sentences.push_back(std::move(s));
  }
  j["sentences"] = std::move(sentences);
  return j;
}

std::string zero_one_table(const std::vector<std::uint32_t>& indices,
                           const std::vector<ZeroOneResult>& results) {
  std::ostringstream out;
  out << "indices: " << index_list(indices) << '\n';
  for (std::size_t i = 0; i < results.size(); ++i) {
    const ZeroOneResult& r = results[i];
    out << "sentence " << i << ": " << r.sentence << '\n';
    out << "  values:";
    for (bool v : r.values) out << ' ' << (v ? '1' : '0');
    out << '\n';
    if (r.stabilized)
      out << "  stabilized: yes (value " << (r.value ? "true" : "false") << ", from index "
          << r.first_stable_index << ")\n";
    else
      out << "  stabilized: no\n";
  }
  return out.str();
}

std::string zero_one_csv(const std::vector<std::uint32_t>& indices,
                         const std::vector<ZeroOneResult>& results) {
  std::ostringstream out;
  out << "index";
  for (std::size_t i = 0; i < results.size(); ++i) out << ",sentence" << i;
  out << '\n';
  for (std::size_t j = 0; j < indices.size(); ++j) {
    out << indices[j];
    for (const ZeroOneResult& r : results) out << ',' << (r.values[j] ? 1 : 0);
    out << '\n';
  }
  return out.str();
}

nlohmann::ordered_json num_bound_json(const NumBoundResult& r) {
  nlohmann::ordered_json j;
  j["bound"] = pfc::to_string(r.bound);
  j["caveat"] = r.caveat;
  j["class_count_stable"] = r.class_count_stable;
  return j;
}

std::string num_bound_table(const NumBoundResult& r) {
  std::ostringstream out;
  out << "bound: " << pfc::to_string(r.bound) << '\n';
  out << "class count stable: " << yes_no(r.class_count_stable) << '\n';
  out << "caveat: empirical estimate from the sampled members only\n";
  return out.str();
}

std::string num_bound_csv(const NumBoundResult& r) {
  std::ostringstream out;
  out << "bound,caveat,class_count_stable\n";
  out << pfc::to_string(r.bound) << ',' << (r.caveat ? "true" : "false") << ','
      << (r.class_count_stable ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace pfc::analysis
