#include "pfc/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pfc/analysis.hpp"

namespace pfc::cli {

namespace {

using nlohmann::ordered_json;

struct CommonOpts {
  std::string family_path;
  std::vector<std::string> formula_args;
  std::string object_csv;
  std::string param_csv;
  std::string q_spec;
  std::uint32_t index = 0;
  std::string indices_spec;
  unsigned n_dim = 0;
  double rel_tol = 1e-3;
  counting::CountOptions count_opts;
  std::string format = "table";

  // The parsed subcommand, used to distinguish omitted flags from given-empty
  // ones (each subcommand registers its own --object/--param options).
  const CLI::App* active = nullptr;
};

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Expands @FILE arguments (one formula per nonblank, non-# line).
std::vector<std::string> resolve_formula_args(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const std::string& arg : raw) {
    if (!arg.empty() && arg.front() == '@') {
      const std::string path = arg.substr(1);
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot read formula file '" + path + "'");
      std::string line;
      while (std::getline(in, line)) {
        const std::string t = trimmed(line);
        if (!t.empty() && t.front() != '#') out.push_back(t);
      }
    } else {
      out.push_back(arg);
    }
  }
  if (out.empty()) throw ConfigError("no formulas given");
  return out;
}

std::string single_formula(const std::vector<std::string>& formulas, const char* cmd) {
  if (formulas.size() != 1)
    throw ConfigError(std::string(cmd) + " needs exactly one formula, got " +
                      std::to_string(formulas.size()));
  return formulas.front();
}

std::vector<std::string> split_variable_list(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  if (trimmed(csv).empty()) return out;
  while (true) {
    const std::size_t comma = csv.find(',', begin);
    const std::string piece =
        trimmed(comma == std::string::npos ? csv.substr(begin) : csv.substr(begin, comma - begin));
    if (piece.empty()) throw ConfigError("empty name in variable list '" + csv + "'");
    out.push_back(piece);
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return out;
}

// Omitted --object and --param default to a full object-side split; giving
// only one of them assigns the remaining free variables to the other side.
logic::VariablePartition resolve_partition(const logic::Formula& f, const CommonOpts& o) {
  const bool object_given = o.active && o.active->count("--object") > 0;
  const bool param_given = o.active && o.active->count("--param") > 0;
  std::vector<std::string> object_vars;
  std::vector<std::string> param_vars;
  if (object_given) object_vars = split_variable_list(o.object_csv);
  if (param_given) param_vars = split_variable_list(o.param_csv);

  const auto& free = f.free_variables();
  const auto fill_rest = [&free](const std::vector<std::string>& taken) {
    std::vector<std::string> rest;
    for (const auto& v : free)
      if (std::find(taken.begin(), taken.end(), v) == taken.end()) rest.push_back(v);
    return rest;
  };
  if (!object_given && !param_given) {
    object_vars = free;
  } else if (object_given && !param_given) {
    param_vars = fill_rest(object_vars);
  } else if (param_given && !object_given) {
    object_vars = fill_rest(param_vars);
  }
  return logic::make_partition(f, object_vars, param_vars);
}

analysis::QSelector resolve_selector(const std::string& spec, const logic::Signature& sig) {
  if (trimmed(spec).empty()) return analysis::default_q_selector();
  const std::size_t semi = spec.find(';');
  analysis::QSelector sel;
  sel.theta = logic::parse_formula(
      trimmed(semi == std::string::npos ? spec : spec.substr(0, semi)), sig);
  if (semi != std::string::npos) {
    const std::string kappa_text = trimmed(spec.substr(semi + 1));
    if (!kappa_text.empty()) sel.kappa = logic::parse_formula(kappa_text, sig);
  }
  analysis::validate_selector(sel);
  return sel;
}

std::uint32_t parse_u32(const std::string& text, const char* what) {
  const std::string t = trimmed(text);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(std::string(what) + " must be a nonnegative integer, got '" + text + "'");
  try {
    const unsigned long v = std::stoul(t);
    if (v > UINT32_MAX) throw std::out_of_range("u32");
    return static_cast<std::uint32_t>(v);
  } catch (const std::exception&) {
    throw ConfigError(std::string(what) + " out of range: '" + text + "'");
  }
}

std::vector<std::uint32_t> resolve_indices(const std::string& spec,
                                           const structures::FamilySpec& family) {
  std::uint32_t lo = 0, hi = 0;
  if (trimmed(spec).empty()) {
    lo = family.index_domain.lo;
    hi = static_cast<std::uint32_t>(
        std::min<std::uint64_t>(family.index_domain.hi, std::uint64_t(lo) + 11));
  } else {
    const std::size_t dots = spec.find("..");
    if (dots == std::string::npos)
      throw ConfigError("indices must look like LO..HI, got '" + spec + "'");
    lo = parse_u32(spec.substr(0, dots), "index range low end");
    hi = parse_u32(spec.substr(dots + 2), "index range high end");
  }
  if (lo > hi) throw ConfigError("empty index range " + std::to_string(lo) + ".." +
                                 std::to_string(hi));
  if (!family.index_domain.contains(lo) || !family.index_domain.contains(hi))
    throw ConfigError("index range " + std::to_string(lo) + ".." + std::to_string(hi) +
                      " leaves the family domain " + std::to_string(family.index_domain.lo) +
                      ".." + std::to_string(family.index_domain.hi));
  std::vector<std::uint32_t> out;
  out.reserve(hi - lo + 1);
  for (std::uint32_t i = lo; i <= hi; ++i) out.push_back(i);
  return out;
}

void emit_json(std::ostream& out, const ordered_json& j) { out << j.dump(2) << '\n'; }

std::string tuple_string(const structures::Tuple& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(t[i]);
  }
  return s + ")";
}

// --- subcommand bodies ------------------------------------------------------

int run_count(const CommonOpts& o, std::ostream& out) {
  const structures::FamilySpec family = structures::load_family(o.family_path);
  const std::string text = single_formula(resolve_formula_args(o.formula_args), "count");
  const logic::FormulaPtr f = logic::parse_formula(text, family.signature);
  const logic::VariablePartition part = resolve_partition(*f, o);
  if (!part.parameter_vars.empty())
    throw ConfigError("count takes object variables only; use spectrum for parameterized counts");
  const structures::FiniteStructure member = structures::build_member(family, o.index);
  const Natural n = counting::count_solutions(member, *f, part, {}, o.count_opts);
  if (o.format == "json") {
    ordered_json j;
    j["formula"] = logic::to_string(*f);
    j["index"] = o.index;
    j["count"] = pfc::to_string(n);
    emit_json(out, j);
  } else if (o.format == "csv") {
    out << "index,count\n" << o.index << ',' << pfc::to_string(n) << '\n';
  } else {
    out << pfc::to_string(n) << '\n';
  }
  return 0;
}

int run_spectrum(const CommonOpts& o, std::ostream& out) {
  const structures::FamilySpec family = structures::load_family(o.family_path);
  const std::string text = single_formula(resolve_formula_args(o.formula_args), "spectrum");
  const logic::FormulaPtr f = logic::parse_formula(text, family.signature);
  const logic::VariablePartition part = resolve_partition(*f, o);
  const structures::FiniteStructure member = structures::build_member(family, o.index);
  const counting::FiberSpectrum sp =
      counting::fiber_spectrum(member, *f, part, {}, o.count_opts);
  if (o.format == "json") {
    ordered_json j;
    j["formula"] = logic::to_string(*f);
    j["index"] = o.index;
    j["object"] = part.object_vars;
    j["param"] = part.parameter_vars;
    j["total_pairs"] = pfc::to_string(sp.total_pairs);
    ordered_json classes = ordered_json::array();
    for (const counting::FiberClass& c : sp.entries) {
      ordered_json e;
      e["cardinality"] = pfc::to_string(c.cardinality);
      e["size"] = c.members.size();
      e["members"] = c.members;
      classes.push_back(std::move(e));
    }
    j["classes"] = std::move(classes);
    emit_json(out, j);
  } else if (o.format == "csv") {
    out << "class,cardinality,size\n";
    for (std::size_t i = 0; i < sp.entries.size(); ++i)
      out << i << ',' << pfc::to_string(sp.entries[i].cardinality) << ','
          << sp.entries[i].members.size() << '\n';
  } else {
    out << "formula: " << logic::to_string(*f) << '\n';
    out << "index: " << o.index << '\n';
    out << "total pairs: " << pfc::to_string(sp.total_pairs) << '\n';
    for (std::size_t i = 0; i < sp.entries.size(); ++i) {
      const counting::FiberClass& c = sp.entries[i];
      out << "class " << i << ": cardinality " << pfc::to_string(c.cardinality) << ", size "
          << c.members.size() << ", members";
      const std::size_t shown = std::min<std::size_t>(c.members.size(), 8);
      for (std::size_t m = 0; m < shown; ++m) out << ' ' << tuple_string(c.members[m]);
      if (shown < c.members.size()) out << " ... (+" << c.members.size() - shown << " more)";
      out << '\n';
    }
  }
  return 0;
}

int run_fit(const CommonOpts& o, std::ostream& out, bool full_table) {
  const structures::FamilySpec family = structures::load_family(o.family_path);
  const std::string text =
      single_formula(resolve_formula_args(o.formula_args), full_table ? "mec" : "fit");
  const logic::FormulaPtr f = logic::parse_formula(text, family.signature);
  const logic::VariablePartition part = resolve_partition(*f, o);
  const analysis::QSelector sel = resolve_selector(o.q_spec, family.signature);
  const std::vector<std::uint32_t> indices = resolve_indices(o.indices_spec, family);
  const analysis::MecReport report =
      analysis::fit_counting_polynomials(family, *f, part, sel, indices, o.count_opts);
  if (o.format == "json")
    emit_json(out, analysis::mec_report_json(report));
  else if (o.format == "csv")
    out << analysis::mec_report_csv(report);
  else
    out << analysis::mec_report_table(report, full_table);
  const bool ok = report.class_count_stable && report.all_fitted && report.leads_ok;
  return ok ? 0 : 2;
}

int run_ndim(const CommonOpts& o, std::ostream& out) {
  const structures::FamilySpec family = structures::load_family(o.family_path);
  const std::string text = single_formula(resolve_formula_args(o.formula_args), "ndim");
  const logic::FormulaPtr f = logic::parse_formula(text, family.signature);
  const logic::VariablePartition part = resolve_partition(*f, o);
  const analysis::QSelector sel = resolve_selector(o.q_spec, family.signature);
  const std::vector<std::uint32_t> indices = resolve_indices(o.indices_spec, family);
  const analysis::NDimReport report = analysis::ndim_certify(family, *f, part, sel, indices,
                                                             o.n_dim, o.rel_tol, o.count_opts);
  if (o.format == "json")
    emit_json(out, analysis::ndim_report_json(report));
  else if (o.format == "csv")
    out << analysis::ndim_report_csv(report);
  else
    out << analysis::ndim_report_table(report);
  return report.pass ? 0 : 2;
}

int run_zero_one(const CommonOpts& o, std::ostream& out) {
  const structures::FamilySpec family = structures::load_family(o.family_path);
  const std::vector<std::string> texts = resolve_formula_args(o.formula_args);
  std::vector<logic::FormulaPtr> sentences;
  sentences.reserve(texts.size());
  for (const std::string& t : texts) sentences.push_back(logic::parse_formula(t, family.signature));
  const std::vector<std::uint32_t> indices = resolve_indices(o.indices_spec, family);
  const std::vector<analysis::ZeroOneResult> results =
      analysis::zero_one_scan(family, sentences, indices, o.count_opts);
  if (o.format == "json")
    emit_json(out, analysis::zero_one_json(indices, results));
  else if (o.format == "csv")
    out << analysis::zero_one_csv(indices, results);
  else
    out << analysis::zero_one_table(indices, results);
  const bool all_stable = std::all_of(results.begin(), results.end(),
                                      [](const analysis::ZeroOneResult& r) { return r.stabilized; });
  return all_stable ? 0 : 2;
}

int run_num_bound(const CommonOpts& o, std::ostream& out) {
  const structures::FamilySpec family = structures::load_family(o.family_path);
  const std::string text = single_formula(resolve_formula_args(o.formula_args), "num-bound");
  const logic::FormulaPtr f = logic::parse_formula(text, family.signature);
  const logic::VariablePartition part = resolve_partition(*f, o);
  const std::vector<std::uint32_t> indices = resolve_indices(o.indices_spec, family);
  const analysis::NumBoundResult res =
      analysis::num_bound(family, *f, part, indices, o.count_opts);
  if (o.format == "json")
    emit_json(out, analysis::num_bound_json(res));
  else if (o.format == "csv")
    out << analysis::num_bound_csv(res);
  else
    out << analysis::num_bound_table(res);
  return 0;
}

int run_validate(const CommonOpts& o, std::ostream& out) {
  const structures::FamilySpec family = structures::load_family(o.family_path);
  const std::vector<std::uint32_t> indices = resolve_indices(o.indices_spec, family);
  // The five structural sentences apply whenever the family speaks the
  // two-sorted bipartite vocabulary.
  const bool axioms_apply = family.signature == structures::k23_signature();
  const std::vector<logic::FormulaPtr> axioms =
      axioms_apply ? structures::k23_axioms() : std::vector<logic::FormulaPtr>{};

  bool all_ok = true;
  ordered_json members = ordered_json::array();
  std::ostringstream table;
  std::ostringstream csv;
  csv << "index,structure_ok,axioms_ok\n";
  for (const std::uint32_t idx : indices) {
    const structures::FiniteStructure member = structures::build_member(family, idx);
    const std::vector<std::string> violations =
        structures::validate_structure(member, family.signature);
    std::vector<bool> axiom_values;
    bool axioms_ok = true;
    if (axioms_apply && violations.empty()) {
      axiom_values = structures::check_axioms(member, axioms);
      axioms_ok = std::all_of(axiom_values.begin(), axiom_values.end(), [](bool b) { return b; });
    }
    const bool ok = violations.empty() && axioms_ok;
    all_ok = all_ok && ok;

    ordered_json m;
    m["index"] = idx;
    m["violations"] = violations;
    m["axioms"] = axioms_apply ? ordered_json(axiom_values) : ordered_json(nullptr);
    members.push_back(std::move(m));

    table << "index " << idx << ": " << (ok ? "ok" : "INVALID");
    for (const std::string& v : violations) table << "\n  " << v;
    if (axioms_apply && violations.empty()) {
      table << " | axioms:";
      for (bool b : axiom_values) table << ' ' << (b ? '1' : '0');
    }
    table << '\n';
    csv << idx << ',' << (violations.empty() ? "true" : "false") << ','
        << (axioms_apply ? (axioms_ok ? "true" : "false") : "") << '\n';
  }

  if (o.format == "json") {
    ordered_json j;
    j["indices"] = indices;
    j["axioms_checked"] = axioms_apply;
    j["members"] = std::move(members);
    j["ok"] = all_ok;
    emit_json(out, j);
  } else if (o.format == "csv") {
    out << csv.str();
  } else {
    out << table.str();
    out << "ok: " << (all_ok ? "yes" : "no") << '\n';
  }
  return all_ok ? 0 : 2;
}

// --- wiring -----------------------------------------------------------------

enum class Cmd { Count, Spectrum, Fit, Mec, NDim, ZeroOne, NumBound, Validate };

struct Wiring {
  bool formula = false;
  bool partition = false;
  bool selector = false;
  bool single_index = false;
  bool index_range = false;
  bool ndim_flags = false;
};

CLI::App* wire(CLI::App& app, CommonOpts& o, const char* name, const char* help,
               const Wiring& w) {
  CLI::App* cmd = app.add_subcommand(name, help);
  cmd->add_option("--family", o.family_path, "family spec JSON file")
      ->required()
      ->type_name("PATH");
  if (w.formula)
    cmd->add_option("--formula", o.formula_args,
                    "formula text, or @FILE with one formula per line (repeatable)")
        ->required()
        ->type_size(1)
        ->type_name("STR|@FILE");
  if (w.partition) {
    cmd->add_option("--object", o.object_csv,
                    "comma-separated object variables (default: the free variables not "
                    "named in --param)")
        ->type_name("VARS");
    cmd->add_option("--param", o.param_csv,
                    "comma-separated parameter variables (default: empty)")
        ->type_name("VARS");
  }
  if (w.selector)
    cmd->add_option("--q", o.q_spec,
                    "size selector THETA[;KAPPA]; q counts THETA's first free variable "
                    "(default: \"v = v\", the universe size)")
        ->type_name("THETA[;KAPPA]");
  if (w.single_index)
    cmd->add_option("--index", o.index, "family member index")->required()->type_name("INT");
  if (w.index_range)
    cmd->add_option("--indices", o.indices_spec,
                    "sampled member indices (default: first 12 of the family domain)")
        ->type_name("LO..HI");
  if (w.ndim_flags) {
    cmd->add_option("--N", o.n_dim, "claimed dimension of the fitted universe polynomial")
        ->required()
        ->type_name("INT");
    cmd->add_option("--rel-tol", o.rel_tol, "relative error tolerance (default 1e-3)")
        ->type_name("FLOAT");
  }
  cmd->add_option("--budget", o.count_opts.budget,
                  "enumeration budget in tuples (default 1e9)")
      ->type_name("INT");
  cmd->add_option("--jobs", o.count_opts.jobs,
                  "worker cap: 1 = serial reference, 0 = default parallel")
      ->type_name("INT");
  cmd->add_option("--format", o.format, "output format (default table)")
      ->check(CLI::IsMember({"json", "table", "csv"}))
      ->type_name("json|table|csv");
  return cmd;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CommonOpts o;
  CLI::App app{"definable-set counting and polynomial fitting over finite families", "pfc"};
  app.require_subcommand(1);

  CLI::App* count = wire(app, o, "count",
                         "count object-variable solutions in one member",
                         {.formula = true, .partition = true, .single_index = true});
  CLI::App* spectrum = wire(app, o, "spectrum",
                            "group parameter tuples by exact fiber cardinality in one member",
                            {.formula = true, .partition = true, .single_index = true});
  CLI::App* fit = wire(app, o, "fit",
                       "fit exact counting polynomials in q across the family",
                       {.formula = true, .partition = true, .selector = true,
                        .index_range = true});
  CLI::App* mec = wire(app, o, "mec",
                       "fit with the full per-index class report",
                       {.formula = true, .partition = true, .selector = true,
                        .index_range = true});
  CLI::App* ndim = wire(app, o, "ndim",
                        "certify mu * |M|^(d/N) growth for every class",
                        {.formula = true, .partition = true, .selector = true,
                         .index_range = true, .ndim_flags = true});
  CLI::App* zero_one = wire(app, o, "zero-one",
                            "scan sentences for eventual truth-value stabilization",
                            {.formula = true, .index_range = true});
  CLI::App* num_bound = wire(app, o, "num-bound",
                             "1 + the largest constant-class fiber size",
                             {.formula = true, .partition = true, .index_range = true});
  CLI::App* validate = wire(app, o, "validate",
                            "check sampled members against the signature (and the bipartite "
                            "axioms when the vocabulary matches)",
                            {.index_range = true});

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("pfc");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const CLI::App* sub : {count, spectrum, fit, mec, ndim, zero_one, num_bound, validate})
      if (app.got_subcommand(sub)) o.active = sub;
    if (app.got_subcommand(count)) return run_count(o, out);
    if (app.got_subcommand(spectrum)) return run_spectrum(o, out);
    if (app.got_subcommand(fit)) return run_fit(o, out, false);
    if (app.got_subcommand(mec)) return run_fit(o, out, true);
    if (app.got_subcommand(ndim)) return run_ndim(o, out);
    if (app.got_subcommand(zero_one)) return run_zero_one(o, out);
    if (app.got_subcommand(num_bound)) return run_num_bound(o, out);
    if (app.got_subcommand(validate)) return run_validate(o, out);
  } catch (const AnalysisError& e) {
    err << "analysis failed: " << e.what() << '\n';
    return 2;
  } catch (const SelectorError& e) {
    err << "analysis failed: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << "error: no subcommand\n";
  return 1;
}

}  // namespace pfc::cli
