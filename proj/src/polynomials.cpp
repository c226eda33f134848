#include "pfc/polynomials.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pfc::polynomials {

namespace {

Rational rational_pow(const Rational& a, unsigned k) {
  using boost::multiprecision::pow;
  return Rational(pow(numerator(a), k), pow(denominator(a), k));
}

int sign_of(const Rational& x) { return x.sign(); }

void require_positive_lead(const RationalPolynomial& p, const char* who) {
  if (p.is_zero() || *p.degree() == 0)
    throw ConfigError(std::string(who) + " requires a nonconstant polynomial");
  if (sign_of(p.leading()) <= 0)
    throw ConfigError(std::string(who) + " requires a positive leading coefficient");
}

// Coefficient in a multiplicative position: integers bare, fractions in
// parentheses so "3*X" and "(5/2)*X" both read unambiguously.
std::string factor_string(const Rational& abs_coeff) {
  const std::string s = pfc::to_string(abs_coeff);
  return denominator(abs_coeff) == 1 ? s : "(" + s + ")";
}

}  // namespace

RationalPolynomial::RationalPolynomial(std::vector<Rational> coefficients)
    : coeffs_(std::move(coefficients)) {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

RationalPolynomial RationalPolynomial::constant(const Rational& c) {
  return RationalPolynomial(std::vector<Rational>{c});
}

std::optional<unsigned> RationalPolynomial::degree() const {
  if (coeffs_.empty()) return std::nullopt;
  return static_cast<unsigned>(coeffs_.size() - 1);
}

Rational RationalPolynomial::coefficient(unsigned i) const {
  return i < coeffs_.size() ? coeffs_[i] : Rational(0);
}

Rational RationalPolynomial::leading() const {
  if (coeffs_.empty()) throw ConfigError("the zero polynomial has no leading coefficient");
  return coeffs_.back();
}

Rational eval_poly(const RationalPolynomial& p, const Rational& x) {
  Rational acc(0);
  const auto& c = p.coefficients();
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

RationalPolynomial derivative(const RationalPolynomial& p) {
  const auto& c = p.coefficients();
  std::vector<Rational> out;
  for (std::size_t i = 1; i < c.size(); ++i) out.push_back(c[i] * Rational(i));
  return RationalPolynomial(std::move(out));
}

std::string to_string(const RationalPolynomial& p) {
  const auto& c = p.coefficients();
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0) continue;
    const bool negative = sign_of(c[i]) < 0;
    const Rational mag = negative ? Rational(-c[i]) : c[i];
    if (out.empty()) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    if (i == 0)
      out += pfc::to_string(mag);
    else if (i == 1)
      out += factor_string(mag) + "*X";
    else
      out += factor_string(mag) + "*X^" + std::to_string(i);
  }
  return out.empty() ? "0" : out;
}

std::optional<FitResult> interpolate(const std::vector<std::pair<Rational, Rational>>& points,
                                     unsigned max_degree) {
  if (points.size() < static_cast<std::size_t>(max_degree) + 2)
    throw ConfigError("interpolation needs at least max_degree + 2 points, got " +
                      std::to_string(points.size()));
  {
    std::set<Rational> seen;
    for (const auto& [x, y] : points)
      if (!seen.insert(x).second)
        throw ConfigError("duplicate abscissa " + pfc::to_string(x) + " in interpolation input");
  }

  // Newton divided differences over the first max_degree + 1 points:
  // coeffs[k] = f[x_0 .. x_k].
  const std::size_t n_nodes = static_cast<std::size_t>(max_degree) + 1;
  std::vector<Rational> diffs;  // current column f[x_j .. x_{j+k}]
  std::vector<Rational> coeffs;
  for (std::size_t j = 0; j < n_nodes; ++j) diffs.push_back(points[j].second);
  coeffs.push_back(diffs[0]);
  for (std::size_t k = 1; k < n_nodes; ++k) {
    for (std::size_t j = 0; j + k < n_nodes; ++j)
      diffs[j] = (diffs[j + 1] - diffs[j]) / (points[j + k].first - points[j].first);
    diffs.resize(n_nodes - k);
    coeffs.push_back(diffs[0]);
  }

  // Expand Newton form prefixes to the monomial basis incrementally:
  // basis_d = prod_{j<d} (X - x_j), candidate_d = candidate_{d-1} +
  // coeffs[d] * basis_d.
  std::vector<Rational> basis{Rational(1)};
  std::vector<Rational> monomial{coeffs[0]};
  for (unsigned d = 0; d <= max_degree; ++d) {
    if (d > 0) {
      const Rational& xd = points[d - 1].first;
      std::vector<Rational> next(basis.size() + 1, Rational(0));
      for (std::size_t i = 0; i < basis.size(); ++i) {
        next[i] -= basis[i] * xd;
        next[i + 1] += basis[i];
      }
      basis = std::move(next);
      monomial.resize(basis.size(), Rational(0));
      for (std::size_t i = 0; i < basis.size(); ++i) monomial[i] += coeffs[d] * basis[i];
    }
    RationalPolynomial candidate{std::vector<Rational>(monomial)};
    bool all_match = true;
    for (const auto& [x, y] : points)
      if (eval_poly(candidate, x) != y) {
        all_match = false;
        break;
      }
    if (all_match) return FitResult{std::move(candidate), points, true};
  }
  return std::nullopt;
}

int leading_coefficient_sign(const RationalPolynomial& p) {
  return sign_of(p.leading()) < 0 ? -1 : 1;
}

Rational monotonicity_threshold(const RationalPolynomial& p) {
  require_positive_lead(p, "monotonicity_threshold");
  const RationalPolynomial d = derivative(p);
  if (*d.degree() == 0) return Rational(1);  // p linear: increasing everywhere

  // All real roots of p' lie strictly below B = 1 + sum |c_i| / c_lead.
  const auto& dc = d.coefficients();
  Rational bound(1);
  for (std::size_t i = 0; i + 1 < dc.size(); ++i)
    bound += (sign_of(dc[i]) < 0 ? Rational(-dc[i]) : dc[i]) / dc.back();

  constexpr unsigned kCells = 1024;
  std::optional<Rational> largest;
  Rational prev = eval_poly(d, Rational(0));
  if (prev == 0) largest = Rational(0);
  for (unsigned j = 1; j <= kCells; ++j) {
    const Rational x = bound * Rational(j, kCells);
    const Rational v = eval_poly(d, x);
    if (v == 0 || sign_of(prev) * sign_of(v) < 0) largest = x;
    prev = v;
  }

  Rational c = largest ? *largest + 1 : Rational(1);
  // Unreachable unless two crossings shared one grid cell above the last
  // detected one; B + 1 clears every root by the bound above.
  if (eval_poly(d, c) <= 0) c = bound + 1;
  return c;
}

double inverse_on_tail(const RationalPolynomial& p, double y, double abs_tol) {
  require_positive_lead(p, "inverse_on_tail");
  if (!std::isfinite(y)) throw ConfigError("inverse_on_tail needs a finite y");
  if (!(abs_tol > 0) || !std::isfinite(abs_tol))
    throw ConfigError("inverse_on_tail needs a positive tolerance");

  const Rational c = monotonicity_threshold(p);
  const Rational target(y);
  const Rational at_c = eval_poly(p, c);
  if (target < at_c)
    throw ConfigError("y = " + pfc::to_string(target) + " is below the tail range [p(C), inf), p(C) = " +
                      pfc::to_string(at_c));
  if (target == at_c) return to_double(c);

  Rational lo = c;
  Rational hi = std::max(c, Rational(1));
  for (int guard = 0; eval_poly(p, hi) < target; ++guard) {
    if (guard > 1100)
      throw AnalysisError("inverse_on_tail could not bracket y while doubling the upper bound");
    hi *= 2;
  }

  // Invariant: p(lo) < y <= p(hi), so the inverse stays inside [lo, hi].
  const Rational tol(abs_tol);
  for (int iter = 0; hi - lo > tol; ++iter) {
    if (iter > 4096)
      throw AnalysisError("inverse_on_tail iteration budget exhausted before reaching abs_tol");
    const Rational mid = (lo + hi) / 2;
    if (eval_poly(p, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return to_double((lo + hi) / 2);
}

Rational inverse_shift_limit(const RationalPolynomial& p) {
  require_positive_lead(p, "inverse_shift_limit");
  const unsigned n = *p.degree();
  return p.coefficient(n - 1) / (Rational(n) * p.leading());
}

ComposedLeading composed_leading(const RationalPolynomial& g, const RationalPolynomial& f) {
  require_positive_lead(g, "composed_leading");
  require_positive_lead(f, "composed_leading");
  ComposedLeading out;
  const unsigned m = *g.degree();
  const unsigned n = *f.degree();
  out.exponent = Rational(m, n);  // canonical form

  const auto num = static_cast<unsigned>(numerator(out.exponent));
  const auto den = static_cast<unsigned>(denominator(out.exponent));
  const Rational powered = rational_pow(f.leading(), num);
  if (auto root = exact_kth_root(powered, den)) {
    out.mu_exact = g.leading() / *root;
    out.mu = to_double(*out.mu_exact);
  } else {
    out.mu = to_double(g.leading()) /
             std::pow(to_double(f.leading()), static_cast<double>(m) / static_cast<double>(n));
  }
  return out;
}

namespace {

void require_probe_shape(const std::vector<double>& probes, double rel_tol) {
  if (probes.size() < 3) throw ConfigError("limit check needs at least three probes");
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (!std::isfinite(probes[i]) || probes[i] <= 0)
      throw ConfigError("probes must be finite and positive");
    if (i > 0 && probes[i] <= probes[i - 1])
      throw ConfigError("probes must be strictly increasing");
  }
  if (!(rel_tol > 0) || !std::isfinite(rel_tol))
    throw ConfigError("limit check needs a positive relative tolerance");
}

// Bisection tolerance for recovering the inverse near root_estimate: tight
// enough that solver noise sits far below the convergence slack, loose
// enough to keep the bracket from chasing double rounding.
double inverse_tolerance(double root_estimate) {
  return std::max(1e-12, std::abs(root_estimate) * std::ldexp(1.0, -48));
}

LimitCheck finish_check(std::vector<LimitProbe> trace, double target, double rel_tol) {
  LimitCheck check;
  check.trace = std::move(trace);
  check.target = target;
  check.rel_tol = rel_tol;
  const double scale = std::max(1.0, std::abs(target));
  const double slack = 1e-5 * scale;
  const std::size_t k = check.trace.size();
  check.pass = check.trace[k - 1].deviation <= rel_tol * scale &&
               check.trace[k - 3].deviation >= check.trace[k - 2].deviation - slack &&
               check.trace[k - 2].deviation >= check.trace[k - 1].deviation - slack;
  return check;
}

}  // namespace

LimitCheck empirical_limit_check(const RationalPolynomial& p, const std::vector<double>& probes,
                                 double target, double rel_tol) {
  require_probe_shape(probes, rel_tol);
  const Rational c = monotonicity_threshold(p);  // validates p as well
  const Rational at_c = eval_poly(p, c);
  const unsigned n = *p.degree();
  const Rational a_n = p.leading();

  // When every coefficient below the lead vanishes, the inverse is exactly
  // (x/a_n)^(1/n) and the shift is identically zero at every probe.
  bool monomial = true;
  for (unsigned i = 0; i < n; ++i)
    if (p.coefficient(i) != 0) monomial = false;

  std::vector<LimitProbe> trace;
  for (double x : probes) {
    const Rational px(x);
    if (px < at_c)
      throw ConfigError("probe " + std::to_string(x) + " is below the tail threshold p(C) = " +
                        pfc::to_string(at_c));
    LimitProbe probe;
    probe.x = x;
    if (monomial) {
      probe.value = 0.0;
    } else {
      const Rational scaled = px / a_n;
      double shift;
      if (auto exact = exact_kth_root(scaled, n))
        shift = to_double(*exact);
      else
        shift = std::pow(to_double(scaled), 1.0 / n);
      const double inv = inverse_on_tail(p, x, inverse_tolerance(shift));
      probe.value = shift - inv;
    }
    probe.deviation = std::abs(probe.value - target);
    trace.push_back(probe);
  }
  return finish_check(std::move(trace), target, rel_tol);
}

LimitCheck empirical_limit_check(const RationalPolynomial& g, const RationalPolynomial& f,
                                 const std::vector<double>& probes, double target,
                                 double rel_tol) {
  require_probe_shape(probes, rel_tol);
  const ComposedLeading lead = composed_leading(g, f);  // validates g and f
  const Rational c = monotonicity_threshold(f);
  const Rational at_c = eval_poly(f, c);
  const unsigned n = *f.degree();
  const double exponent = to_double(lead.exponent);

  std::vector<LimitProbe> trace;
  for (double x : probes) {
    const Rational px(x);
    if (px < at_c)
      throw ConfigError("probe " + std::to_string(x) + " is below the tail threshold f(C) = " +
                        pfc::to_string(at_c));
    const double root_estimate = std::pow(to_double(px / f.leading()), 1.0 / n);
    const double inv = inverse_on_tail(f, x, inverse_tolerance(root_estimate));
    const double g_val = to_double(eval_poly(g, Rational(inv)));
    LimitProbe probe;
    probe.x = x;
    probe.value = g_val / std::pow(x, exponent);
    probe.deviation = std::abs(probe.value - target);
    trace.push_back(probe);
  }
  return finish_check(std::move(trace), target, rel_tol);
}

}  // namespace pfc::polynomials
