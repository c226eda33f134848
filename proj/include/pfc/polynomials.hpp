#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pfc/errors.hpp"
#include "pfc/numbers.hpp"

namespace pfc::polynomials {

// Univariate polynomial with exact rational coefficients, constant term
// first, normalized (no trailing zero coefficients). The zero polynomial is
// the empty coefficient list; its degree is absent.
class RationalPolynomial {
 public:
  RationalPolynomial() = default;
  explicit RationalPolynomial(std::vector<Rational> coefficients);  // normalizes

  static RationalPolynomial constant(const Rational& c);

  const std::vector<Rational>& coefficients() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }
  std::optional<unsigned> degree() const;

  // Coefficient of X^i, zero when i exceeds the degree.
  Rational coefficient(unsigned i) const;
  // Highest coefficient; throws ConfigError on the zero polynomial.
  Rational leading() const;

  bool operator==(const RationalPolynomial&) const = default;

 private:
  std::vector<Rational> coeffs_;
};

// Exact Horner evaluation.
Rational eval_poly(const RationalPolynomial& p, const Rational& x);

RationalPolynomial derivative(const RationalPolynomial& p);

// Serialized form: terms in ascending degree joined with " + " / " - ",
// integer coefficients bare and non-integer rationals parenthesized, e.g.
// "4*X + 1*X^2", "(5/2)*X", "100 - 1*X", "0".
std::string to_string(const RationalPolynomial& p);

struct FitResult {
  RationalPolynomial poly;
  std::vector<std::pair<Rational, Rational>> sample_points;
  // True when the fit was verified against sample points beyond the ones the
  // interpolant was constructed from; the construction below always holds at
  // least one point out, so returned fits always have this set.
  bool held_out_verified = false;
};

// Finds the least d <= max_degree such that the unique degree-<= d Newton
// interpolant through the first d + 1 points matches every remaining point
// exactly, entirely in rational arithmetic. Returns the fit, or nullopt when
// no degree works. Requires at least max_degree + 2 points (so at least one
// is always held out of construction) with pairwise distinct abscissae;
// throws ConfigError otherwise.
std::optional<FitResult> interpolate(const std::vector<std::pair<Rational, Rational>>& points,
                                     unsigned max_degree);

// +1 or -1; throws ConfigError on the zero polynomial.
int leading_coefficient_sign(const RationalPolynomial& p);

// A threshold C >= 0 with p strictly increasing on [C, inf), for nonconstant
// p with positive leading coefficient (throws ConfigError otherwise). The
// derivative's real roots all lie below a Cauchy-style bound B; sign changes
// of p' are bracketed on a 1024-cell grid over [0, B] and C is the largest
// bracket's upper end plus a margin of 1 (C = 1 when p' has no sign change
// there). Every grid comparison is exact rational.
Rational monotonicity_threshold(const RationalPolynomial& p);

// Solves p(x) = y for the unique x on [C, inf) by monotone bisection with
// exact rational arithmetic, returning x within abs_tol of the true inverse.
// Requires p nonconstant with positive leading coefficient, abs_tol > 0, and
// y >= p(C) (ConfigError otherwise); throws AnalysisError when the iteration
// budget runs out before the bracket shrinks to abs_tol.
double inverse_on_tail(const RationalPolynomial& p, double y, double abs_tol);

// The exact limit of (x/a_n)^(1/n) - p_inverse(x) as x grows, which is
// a_{n-1} / (n * a_n) for p of degree n >= 1 with positive leading
// coefficient a_n (ConfigError otherwise).
Rational inverse_shift_limit(const RationalPolynomial& p);

struct ComposedLeading {
  double mu = 0.0;                  // b_m / a_n^(m/n)
  Rational exponent;                // m/n, canonical
  // Set when a_n^(m/n) is exactly rational, making mu exactly representable;
  // consumers use it to keep downstream error terms identically zero.
  std::optional<Rational> mu_exact;
};

// Leading behavior of g composed with the inverse of f: g(f_inverse(x)) grows
// like mu * x^(m/n) with m = deg g, n = deg f. Both polynomials must be
// nonconstant with positive leading coefficients (ConfigError otherwise).
ComposedLeading composed_leading(const RationalPolynomial& g, const RationalPolynomial& f);

struct LimitProbe {
  double x = 0.0;
  double value = 0.0;      // the measured quantity at this probe
  double deviation = 0.0;  // |value - target|
};

struct LimitCheck {
  std::vector<LimitProbe> trace;
  double target = 0.0;
  double rel_tol = 0.0;
  bool pass = false;
};

// Probes the shift (x/a_n)^(1/n) - p_inverse(x) at each x and compares it to
// target. Passes iff the final deviation is at most rel_tol * max(1,
// |target|) and the deviations are nonincreasing over the final three probes
// (up to a slack of 1e-5 * max(1, |target|) absorbing inverse-solver noise).
// When every coefficient of p below the leading one vanishes the shift is
// identically zero and the probes are exact. Requires at least three
// strictly increasing probes, each at least p(C); ConfigError otherwise.
LimitCheck empirical_limit_check(const RationalPolynomial& p, const std::vector<double>& probes,
                                 double target, double rel_tol);

// Same protocol for the composed ratio g(f_inverse(x)) / x^(m/n), whose limit
// is composed_leading(g, f).mu; pass the intended limit as target.
LimitCheck empirical_limit_check(const RationalPolynomial& g, const RationalPolynomial& f,
                                 const std::vector<double>& probes, double target, double rel_tol);

}  // namespace pfc::polynomials
