#include "pfc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pfc::analysis {

using counting::Assignment;
using counting::CountOptions;
using structures::Element;
using structures::FamilySpec;
using structures::FiniteStructure;
using structures::Tuple;

namespace {

std::uint64_t pow_saturating(std::uint64_t base, unsigned exp) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (base != 0 && r > UINT64_MAX / base) return UINT64_MAX;
    r *= base;
  }
  return r;
}

void require_ascending(const std::vector<std::uint32_t>& indices, const char* who) {
  if (indices.empty()) throw AnalysisError(std::string(who) + ": no sampled indices");
  for (std::size_t i = 1; i < indices.size(); ++i)
    if (indices[i] <= indices[i - 1])
      throw ConfigError(std::string(who) + ": indices must be strictly ascending");
}

// theta's parameter variables: every free variable after the first.
std::vector<std::string> selector_parameters(const QSelector& sel) {
  const auto& free = sel.theta->free_variables();
  return {free.begin() + 1, free.end()};
}

bool is_constant_fit(const polynomials::RationalPolynomial& p) {
  return p.is_zero() || *p.degree() == 0;
}

}  // namespace

QSelector default_q_selector() {
  const logic::Term v{logic::Term::Kind::Variable, "v"};
  return QSelector{logic::Formula::equality(v, v), nullptr};
}

void validate_selector(const QSelector& sel) {
  if (!sel.theta) throw ConfigError("q selector has no theta formula");
  if (sel.theta->free_variables().empty())
    throw ConfigError("theta must have at least one free variable (the counted one)");
  if (sel.kappa) {
    const auto params = selector_parameters(sel);
    for (const auto& v : sel.kappa->free_variables())
      if (std::find(params.begin(), params.end(), v) == params.end())
        throw ConfigError("kappa variable '" + v + "' is not a parameter variable of theta");
  }
}

QSelection select_q_parameters(const FiniteStructure& member, const QSelector& sel,
                               const CountOptions& opts) {
  validate_selector(sel);
  if (member.size == 0) throw SelectorError("cannot select parameters in an empty member");

  const auto& free = sel.theta->free_variables();
  const std::string& counted = free.front();
  const std::vector<std::string> params = selector_parameters(sel);
  const auto k = static_cast<unsigned>(params.size());

  Tuple chosen(k, 0);
  if (sel.kappa) {
    if (pow_saturating(member.size, k) > opts.budget)
      throw BudgetError("kappa parameter scan of size " + std::to_string(member.size) + "^" +
                        std::to_string(k) + " exceeds the budget");
    const auto& kappa_vars = sel.kappa->free_variables();
    bool found = false;
    const std::uint64_t space = pow_saturating(member.size, k);
    for (std::uint64_t rank = 0; rank < space && !found; ++rank) {
      std::uint64_t rest = rank;
      for (unsigned i = k; i-- > 0;) {
        chosen[i] = static_cast<Element>(rest % member.size);
        rest /= member.size;
      }
      Assignment a;
      for (unsigned i = 0; i < k; ++i)
        if (std::find(kappa_vars.begin(), kappa_vars.end(), params[i]) != kappa_vars.end())
          a[params[i]] = chosen[i];
      found = counting::evaluate(member, *sel.kappa, a);
    }
    if (!found) throw SelectorError("no parameter tuple satisfies kappa in this member");
  }

  Assignment param_values;
  for (unsigned i = 0; i < k; ++i) param_values[params[i]] = chosen[i];
  const logic::VariablePartition part = logic::make_partition(*sel.theta, {counted}, params);
  const Natural q = counting::count_solutions(member, *sel.theta, part, param_values, opts);
  if (q == 0)
    throw SelectorError("the selected parameter tuple gives an empty theta instance");
  return QSelection{std::move(chosen), q};
}

MecReport fit_counting_polynomials(const FamilySpec& family, const logic::Formula& f,
                                   const logic::VariablePartition& part, const QSelector& sel,
                                   const std::vector<std::uint32_t>& indices,
                                   const CountOptions& opts) {
  validate_selector(sel);
  require_ascending(indices, "fit");

  MecReport report;
  report.formula = logic::to_string(f);
  report.object_vars = part.object_vars;
  report.parameter_vars = part.parameter_vars;

  std::vector<counting::FiberSpectrum> spectra;
  for (const std::uint32_t idx : indices) {
    const FiniteStructure member = structures::build_member(family, idx);
    Natural q;
    try {
      q = select_q_parameters(member, sel, opts).q;
    } catch (const SelectorError&) {
      report.skipped.push_back(idx);
      continue;
    }
    spectra.push_back(counting::fiber_spectrum(member, f, part, {}, opts));
    report.indices.push_back(idx);
    report.q_values.push_back(std::move(q));
  }
  if (report.indices.size() < 2)
    throw AnalysisError("fit needs at least two usable members, got " +
                        std::to_string(report.indices.size()));

  for (const auto& sp : spectra) report.class_counts.push_back(sp.entries.size());
  report.class_count_stable = std::all_of(
      report.class_counts.begin(), report.class_counts.end(),
      [&](std::size_t c) { return c == report.class_counts.front(); });
  if (!report.class_count_stable) return report;  // no fits for unstable families

  {
    std::set<Natural> distinct(report.q_values.begin(), report.q_values.end());
    if (distinct.size() < 2)
      throw AnalysisError("fit needs at least two distinct q values across the sampled members");
  }

  const std::size_t n_classes = report.class_counts.front();
  const std::size_t n_members = report.indices.size();
  report.all_fitted = true;
  report.leads_ok = true;
  for (std::size_t r = 0; r < n_classes; ++r) {
    MecClass cls;
    for (std::size_t j = 0; j < n_members; ++j) {
      cls.cardinalities.push_back(spectra[j].entries[r].cardinality);
      cls.class_sizes.push_back(Natural(spectra[j].entries[r].members.size()));
    }
    cls.witness = spectra[0].entries[r].members.front();

    // Collapse duplicate q values; a conflict (same q, different count)
    // rules out any function of q.
    std::map<Natural, Natural> by_q;
    bool conflict = false;
    for (std::size_t j = 0; j < n_members; ++j) {
      auto [it, inserted] = by_q.emplace(report.q_values[j], cls.cardinalities[j]);
      if (!inserted && it->second != cls.cardinalities[j]) conflict = true;
    }
    if (!conflict) {
      std::vector<std::pair<Rational, Rational>> points;
      points.reserve(by_q.size());
      for (const auto& [q, c] : by_q) points.emplace_back(Rational(q), Rational(c));
      const auto max_degree = static_cast<unsigned>(points.size() - 2);
      if (auto fit = polynomials::interpolate(points, max_degree)) cls.poly = fit->poly;
    }

    if (cls.poly) {
      cls.positive_lead =
          cls.poly->is_zero() || polynomials::leading_coefficient_sign(*cls.poly) > 0;
      if (!cls.positive_lead) report.leads_ok = false;
    } else {
      report.all_fitted = false;
    }
    report.classes.push_back(std::move(cls));
  }
  return report;
}

NDimReport ndim_certify(const FamilySpec& family, const logic::Formula& f,
                        const logic::VariablePartition& part, const QSelector& sel,
                        const std::vector<std::uint32_t>& indices, unsigned N, double rel_tol,
                        const CountOptions& opts) {
  if (N == 0) throw ConfigError("N must be positive");
  if (!(rel_tol > 0) || !std::isfinite(rel_tol))
    throw ConfigError("rel_tol must be positive");

  const MecReport fit_f = fit_counting_polynomials(family, f, part, sel, indices, opts);
  if (!fit_f.class_count_stable)
    throw AnalysisError("cannot certify: the class count is unstable across the sampled members");
  if (!fit_f.all_fitted)
    throw AnalysisError("cannot certify: some classes have no exact polynomial fit");

  const logic::Term x{logic::Term::Kind::Variable, "x"};
  const logic::FormulaPtr universe = logic::Formula::equality(x, x);
  const logic::VariablePartition upart = logic::make_partition(*universe, {"x"}, {});
  const MecReport fit_u = fit_counting_polynomials(family, *universe, upart, sel, indices, opts);
  if (!fit_u.all_fitted || fit_u.classes.size() != 1)
    throw AnalysisError("cannot certify: the universe counts admit no polynomial fit");
  const polynomials::RationalPolynomial F = *fit_u.classes[0].poly;
  if (!F.degree() || *F.degree() != N)
    throw AnalysisError("claimed N = " + std::to_string(N) +
                        " contradicts the fitted universe polynomial " + polynomials::to_string(F) +
                        (F.degree() ? " of degree " + std::to_string(*F.degree())
                                    : " (identically zero)"));
  if (fit_f.indices != fit_u.indices)
    throw AnalysisError("formula and universe fits skipped different members");
  if (fit_f.indices.size() < 3)
    throw AnalysisError("certification needs at least three usable indices");

  NDimReport report;
  report.N = N;
  report.universe_poly = F;
  report.indices = fit_f.indices;
  report.skipped = fit_f.skipped;
  report.rel_tol = rel_tol;

  const std::vector<Natural>& sizes = fit_u.classes[0].cardinalities;
  const std::size_t n_members = report.indices.size();
  report.pass = true;
  for (const MecClass& cls : fit_f.classes) {
    const polynomials::RationalPolynomial& G = *cls.poly;
    NDimEntry entry;
    if (is_constant_fit(G)) {
      // Constant classes sit at dimension 0 with mu the constant itself.
      entry.d = 0;
      entry.mu_exact = G.is_zero() ? Rational(0) : G.coefficient(0);
      entry.mu = to_double(*entry.mu_exact);
      for (std::size_t j = 0; j < n_members; ++j) {
        const Rational err = Rational(cls.cardinalities[j]) - *entry.mu_exact;
        entry.errors.push_back(std::abs(to_double(err)));
      }
    } else {
      const polynomials::ComposedLeading lead = polynomials::composed_leading(G, F);
      entry.d = *G.degree();
      entry.mu = lead.mu;
      entry.mu_exact = lead.mu_exact;
      for (std::size_t j = 0; j < n_members; ++j) {
        const Natural grown = boost::multiprecision::pow(sizes[j], entry.d);
        std::optional<Rational> root;
        if (lead.mu_exact) root = exact_kth_root(Rational(grown), N);
        if (root) {
          const Rational err = (Rational(cls.cardinalities[j]) - *lead.mu_exact * *root) / *root;
          entry.errors.push_back(std::abs(to_double(err)));
        } else {
          const double x_pow = std::pow(to_double(sizes[j]),
                                        static_cast<double>(entry.d) / static_cast<double>(N));
          entry.errors.push_back(std::abs(to_double(cls.cardinalities[j]) - lead.mu * x_pow) /
                                 x_pow);
        }
      }
    }

    const std::size_t k = entry.errors.size();
    constexpr double kSlack = 1e-12;
    const bool converges = entry.errors[k - 1] <= rel_tol &&
                           entry.errors[k - 3] >= entry.errors[k - 2] - kSlack &&
                           entry.errors[k - 2] >= entry.errors[k - 1] - kSlack;
    if (!converges) report.pass = false;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

std::vector<ZeroOneResult> zero_one_scan(const FamilySpec& family,
                                         const std::vector<logic::FormulaPtr>& sentences,
                                         const std::vector<std::uint32_t>& indices,
                                         const CountOptions& opts) {
  (void)opts;
  require_ascending(indices, "zero-one scan");
  if (indices.size() < 3) throw AnalysisError("zero-one scan needs at least three indices");
  if (sentences.empty()) throw ConfigError("zero-one scan needs at least one sentence");
  for (const auto& s : sentences) {
    if (!s) throw ConfigError("null sentence");
    if (!logic::is_sentence(*s))
      throw EvalError("zero-one scan needs sentences; '" + logic::to_string(*s) +
                      "' has free variables");
  }

  std::vector<ZeroOneResult> results(sentences.size());
  for (std::size_t k = 0; k < sentences.size(); ++k)
    results[k].sentence = logic::to_string(*sentences[k]);

  for (const std::uint32_t idx : indices) {
    const FiniteStructure member = structures::build_member(family, idx);
    for (std::size_t k = 0; k < sentences.size(); ++k)
      results[k].values.push_back(counting::evaluate(member, *sentences[k], {}));
  }

  const std::size_t n = indices.size();
  const std::size_t needed = std::max<std::size_t>(2, (n + 1) / 2);
  for (auto& r : results) {
    std::size_t start = n - 1;  // first position of the final constant run
    while (start > 0 && r.values[start - 1] == r.values[n - 1]) --start;
    r.stabilized = (n - start) >= needed;
    r.value = r.values[n - 1];
    r.first_stable_index = indices[start];
  }
  return results;
}

NumBoundResult num_bound(const FamilySpec& family, const logic::Formula& f,
                         const logic::VariablePartition& part,
                         const std::vector<std::uint32_t>& indices, const CountOptions& opts) {
  const MecReport report =
      fit_counting_polynomials(family, f, part, default_q_selector(), indices, opts);
  NumBoundResult out;
  out.caveat = true;
  out.class_count_stable = report.class_count_stable;
  out.bound = 1;
  if (!report.class_count_stable) return out;
  std::optional<Natural> largest;
  for (const MecClass& cls : report.classes) {
    if (!cls.poly || !is_constant_fit(*cls.poly)) continue;
    const Natural top = *std::max_element(cls.cardinalities.begin(), cls.cardinalities.end());
    if (!largest || top > *largest) largest = top;
  }
  if (largest) out.bound = *largest + 1;
  return out;
}

bool check_partition(const FiniteStructure& member,
                     const std::vector<logic::FormulaPtr>& formulas, unsigned arity,
                     const CountOptions& opts) {
  if (formulas.empty()) throw ConfigError("check_partition needs at least one formula");
  for (const auto& f : formulas)
    if (!f) throw ConfigError("null formula");

  std::vector<std::string> vars;  // first-occurrence union across all formulas
  for (const auto& f : formulas)
    for (const auto& v : f->free_variables())
      if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
  if (vars.size() != arity)
    throw EvalError("the formulas use " + std::to_string(vars.size()) +
                    " free variables, expected arity " + std::to_string(arity));
  if (member.size == 0) return true;

  // Pairwise disjoint: every two-way overlap is empty.
  for (std::size_t i = 0; i < formulas.size(); ++i)
    for (std::size_t j = i + 1; j < formulas.size(); ++j) {
      const logic::FormulaPtr both = logic::Formula::conjunction(formulas[i], formulas[j]);
      const logic::VariablePartition p =
          logic::make_partition(*both, both->free_variables(), {});
      if (counting::count_solutions(member, *both, p, {}, opts) != 0) return false;
    }

  // Jointly exhaustive: the union covers the full arity-power.
  logic::FormulaPtr any = formulas.front();
  for (std::size_t i = 1; i < formulas.size(); ++i)
    any = logic::Formula::disjunction(any, formulas[i]);
  const logic::VariablePartition p = logic::make_partition(*any, any->free_variables(), {});
  const Natural covered = counting::count_solutions(member, *any, p, {}, opts);
  return covered == boost::multiprecision::pow(Natural(member.size), arity);
}

}  // namespace pfc::analysis
