#include <doctest.h>

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "generators.hpp"
#include "pfc/errors.hpp"
#include "pfc/numbers.hpp"
#include "pfc/polynomials.hpp"

using namespace pfc;
using polynomials::RationalPolynomial;

namespace {

RationalPolynomial poly(std::vector<Rational> coeffs) {
  return RationalPolynomial(std::move(coeffs));
}

const RationalPolynomial five_halves_x = poly({0, Rational(5, 2)});
const RationalPolynomial square_plus = poly({0, 4, 1});  // X^2 + 4X

}  // namespace

TEST_CASE("polynomial normalization and accessors") {
  CHECK(poly({}).is_zero());
  CHECK(poly({0, 0, 0}).is_zero());
  CHECK_FALSE(poly({0, 0, 0}).degree().has_value());
  CHECK(poly({7}).degree() == 0u);
  CHECK(poly({0, 4, 1, 0, 0}).degree() == 2u);
  CHECK(poly({0, 4, 1, 0}).coefficients() == std::vector<Rational>{0, 4, 1});
  CHECK(square_plus.coefficient(1) == 4);
  CHECK(square_plus.coefficient(5) == 0);
  CHECK(square_plus.leading() == 1);
  CHECK_THROWS_AS(poly({}).leading(), ConfigError);
  CHECK(RationalPolynomial::constant(Rational(3, 4)) == poly({Rational(3, 4)}));
  CHECK(RationalPolynomial::constant(0).is_zero());
}

TEST_CASE("exact evaluation") {
  CHECK(polynomials::eval_poly(five_halves_x, 4) == 10);
  CHECK(polynomials::eval_poly(five_halves_x, 0) == 0);
  CHECK(polynomials::eval_poly(square_plus, 10) == 140);
  CHECK(polynomials::eval_poly(five_halves_x, Rational(1, 5)) == Rational(1, 2));
  CHECK(polynomials::eval_poly(poly({}), 123) == 0);
}

TEST_CASE("derivatives") {
  CHECK(polynomials::derivative(square_plus) == poly({4, 2}));
  CHECK(polynomials::derivative(poly({9})).is_zero());
  CHECK(polynomials::derivative(poly({})).is_zero());
  CHECK(polynomials::derivative(poly({0, 0, 0, Rational(1, 3)})) == poly({0, 0, 1}));
}

TEST_CASE("serialized form") {
  CHECK(polynomials::to_string(five_halves_x) == "(5/2)*X");
  CHECK(polynomials::to_string(square_plus) == "4*X + 1*X^2");
  CHECK(polynomials::to_string(poly({})) == "0");
  CHECK(polynomials::to_string(poly({2})) == "2");
  CHECK(polynomials::to_string(poly({0, 1})) == "1*X");
  CHECK(polynomials::to_string(poly({100, -1})) == "100 - 1*X");
  // Fractions are parenthesized only inside *X factors; constants print bare.
  CHECK(polynomials::to_string(poly({Rational(-1, 2), 0, 3})) == "-1/2 + 3*X^2");
  CHECK(polynomials::to_string(poly({0, Rational(-5, 2)})) == "-(5/2)*X");
}

TEST_CASE("interpolation finds the least degree and verifies held-out points") {
  using Points = std::vector<std::pair<Rational, Rational>>;

  const Points linear{{2, 5}, {4, 10}, {6, 15}, {8, 20}};
  const auto fit = polynomials::interpolate(linear, 2);
  REQUIRE(fit.has_value());
  CHECK(fit->poly == five_halves_x);
  CHECK(fit->poly.degree() == 1u);
  CHECK(fit->held_out_verified);

  const Points flat{{1, 7}, {2, 7}, {3, 7}};
  const auto cfit = polynomials::interpolate(flat, 1);
  REQUIRE(cfit.has_value());
  CHECK(cfit->poly == poly({7}));
  CHECK(cfit->poly.degree() == 0u);

  Points quad;
  for (int x = 1; x <= 5; ++x)
    quad.emplace_back(x, polynomials::eval_poly(square_plus, x));
  const auto qfit = polynomials::interpolate(quad, 3);
  REQUIRE(qfit.has_value());
  CHECK(qfit->poly == square_plus);

  // Not polynomial of degree <= 2 on these points.
  const Points expish{{1, 1}, {2, 2}, {3, 4}, {4, 8}, {5, 16}};
  CHECK_FALSE(polynomials::interpolate(expish, 2).has_value());

  // Input validation.
  CHECK_THROWS_AS(polynomials::interpolate(Points{{1, 1}, {1, 2}, {2, 3}, {3, 4}}, 2),
                  ConfigError);  // duplicate abscissa
  CHECK_THROWS_AS(polynomials::interpolate(Points{{1, 1}, {2, 2}}, 1), ConfigError);  // too few
  CHECK_NOTHROW(polynomials::interpolate(Points{{1, 1}, {2, 2}, {3, 3}}, 1));
}

TEST_CASE("interpolation recovers random polynomials exactly") {
  std::mt19937 rng(31337);
  for (int trial = 0; trial < 60; ++trial) {
    const unsigned degree = testgen::pick_uint(rng, 0, 6);
    const auto p = testgen::random_poly(rng, degree, 50, 50);
    std::vector<std::pair<Rational, Rational>> pts;
    for (unsigned x = 1; x <= degree + 3; ++x)
      pts.emplace_back(x, polynomials::eval_poly(p, x));
    const auto fit = polynomials::interpolate(pts, degree + 1);
    CAPTURE(polynomials::to_string(p));
    REQUIRE(fit.has_value());
    CHECK(fit->poly == p);
    CHECK(fit->held_out_verified);
  }
}

TEST_CASE("leading coefficient sign") {
  CHECK(polynomials::leading_coefficient_sign(five_halves_x) == 1);
  CHECK(polynomials::leading_coefficient_sign(poly({3, -1})) == -1);
  CHECK_THROWS_AS(polynomials::leading_coefficient_sign(poly({})), ConfigError);
}

TEST_CASE("monotonicity threshold brackets all derivative sign changes") {
  std::mt19937 rng(8086);
  CHECK(polynomials::monotonicity_threshold(square_plus) >= 0);
  CHECK_THROWS_AS(polynomials::monotonicity_threshold(poly({5})), ConfigError);
  CHECK_THROWS_AS(polynomials::monotonicity_threshold(poly({0, -1})), ConfigError);

  // (X - 10)^2 turns around at 10; the threshold must land at or beyond it.
  const auto shifted = poly({100, -20, 1});
  const Rational c = polynomials::monotonicity_threshold(shifted);
  CHECK(c >= 10);

  for (int trial = 0; trial < 40; ++trial) {
    const unsigned degree = 1 + testgen::pick_uint(rng, 0, 3);
    const auto p = testgen::random_positive_lead_poly(rng, degree, 9, 9);
    const Rational thr = polynomials::monotonicity_threshold(p);
    CAPTURE(polynomials::to_string(p));
    CHECK(thr >= 0);
    Rational prev = polynomials::eval_poly(p, thr);
    for (int step = 1; step <= 4; ++step) {
      const Rational here = polynomials::eval_poly(p, thr + step);
      CHECK(here > prev);
      prev = here;
    }
  }
}

TEST_CASE("tail inversion") {
  CHECK(polynomials::inverse_on_tail(poly({0, 0, 1}), 49.0, 1e-9) == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(polynomials::inverse_on_tail(square_plus, 140.0, 1e-9) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(polynomials::inverse_on_tail(five_halves_x, 35.0, 1e-9) == doctest::Approx(14.0).epsilon(1e-9));

  CHECK_THROWS_AS(polynomials::inverse_on_tail(square_plus, 140.0, 0.0), ConfigError);
  CHECK_THROWS_AS(polynomials::inverse_on_tail(square_plus, -1e9, 1e-6), ConfigError);
  CHECK_THROWS_AS(polynomials::inverse_on_tail(poly({2}), 2.0, 1e-6), ConfigError);

  std::mt19937 rng(2718281);
  for (int trial = 0; trial < 40; ++trial) {
    const unsigned degree = 1 + testgen::pick_uint(rng, 0, 3);
    const auto p = testgen::random_positive_lead_poly(rng, degree, 9, 9);
    const Rational c = polynomials::monotonicity_threshold(p);
    const Rational x0 = c + 1 + testgen::pick_uint(rng, 0, 50);
    const double y = to_double(polynomials::eval_poly(p, x0));
    const double x = polynomials::inverse_on_tail(p, y, 1e-9);
    CAPTURE(polynomials::to_string(p));
    // p is continuous, so feeding the inverse back in must reproduce y.
    const double roundtrip = to_double(polynomials::eval_poly(p, Rational(x)));
    CHECK(std::abs(roundtrip - y) <= 1e-5 * std::max(1.0, std::abs(y)));
  }
}

TEST_CASE("inverse shift limit is the subleading ratio") {
  CHECK(polynomials::inverse_shift_limit(square_plus) == 2);
  CHECK(polynomials::inverse_shift_limit(poly({0, 0, 0, 1})) == 0);
  CHECK(polynomials::inverse_shift_limit(poly({3, Rational(5, 2)})) == Rational(6, 5));
  CHECK_THROWS_AS(polynomials::inverse_shift_limit(poly({4})), ConfigError);
  CHECK_THROWS_AS(polynomials::inverse_shift_limit(poly({0, -2, -1})), ConfigError);
}

TEST_CASE("leading behavior of composed growth") {
  const auto three_halves_x = poly({0, Rational(3, 2)});
  const auto res = polynomials::composed_leading(three_halves_x, five_halves_x);
  CHECK(res.exponent == 1);
  REQUIRE(res.mu_exact.has_value());
  CHECK(*res.mu_exact == Rational(3, 5));
  CHECK(res.mu == doctest::Approx(0.6).epsilon(1e-12));

  const auto self = polynomials::composed_leading(square_plus, square_plus);
  CHECK(self.exponent == 1);
  REQUIRE(self.mu_exact.has_value());
  CHECK(*self.mu_exact == 1);
  CHECK(self.mu == doctest::Approx(1.0).epsilon(1e-12));

  const auto half = polynomials::composed_leading(poly({0, 0, 1}), poly({0, 0, 0, 0, 1}));
  CHECK(half.exponent == Rational(1, 2));
  REQUIRE(half.mu_exact.has_value());
  CHECK(*half.mu_exact == 1);

  // 3X against 4X^2: mu = 3 / sqrt(4) = 3/2 exactly.
  const auto exact_root = polynomials::composed_leading(poly({0, 3}), poly({0, 0, 4}));
  CHECK(exact_root.exponent == Rational(1, 2));
  REQUIRE(exact_root.mu_exact.has_value());
  CHECK(*exact_root.mu_exact == Rational(3, 2));

  // 3X against 2X^2: mu = 3 / sqrt(2), not rational.
  const auto irr = polynomials::composed_leading(poly({0, 3}), poly({0, 0, 2}));
  CHECK_FALSE(irr.mu_exact.has_value());
  CHECK(irr.mu == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(polynomials::composed_leading(poly({1}), square_plus), ConfigError);
  CHECK_THROWS_AS(polynomials::composed_leading(square_plus, poly({0, -1})), ConfigError);
}

TEST_CASE("empirical limit probes converge to the analytic shift") {
  const std::vector<double> probes{1e4, 1e6, 1e8};
  const auto good = polynomials::empirical_limit_check(square_plus, probes, 2.0, 1e-3);
  CHECK(good.pass);
  REQUIRE(good.trace.size() == 3);
  CHECK(good.trace.back().deviation <= 1e-3);

  // Pure power: the shift is identically zero and measured exactly.
  const auto pure = polynomials::empirical_limit_check(poly({0, 0, 0, 1}), {10.0, 100.0, 1000.0},
                                                       0.0, 1e-12);
  CHECK(pure.pass);
  for (const auto& probe : pure.trace) CHECK(probe.deviation == 0.0);

  // A wrong target fails on tolerance.
  const auto bad = polynomials::empirical_limit_check(square_plus, probes, 3.0, 1e-3);
  CHECK_FALSE(bad.pass);

  CHECK_THROWS_AS(polynomials::empirical_limit_check(square_plus, {1e4, 1e6}, 2.0, 1e-3),
                  ConfigError);
  CHECK_THROWS_AS(polynomials::empirical_limit_check(square_plus, {1e6, 1e4, 1e8}, 2.0, 1e-3),
                  ConfigError);
  CHECK_THROWS_AS(polynomials::empirical_limit_check(square_plus, {-5.0, 1e4, 1e6}, 2.0, 1e-3),
                  ConfigError);
}

TEST_CASE("empirical composed ratio matches its leading coefficient") {
  const auto three_halves_x = poly({0, Rational(3, 2)});
  const auto check = polynomials::empirical_limit_check(three_halves_x, five_halves_x,
                                                        {1e4, 1e6, 1e8}, 0.6, 1e-3);
  CHECK(check.pass);
  CHECK(check.trace.back().deviation <= 1e-3);

  const auto wrong = polynomials::empirical_limit_check(three_halves_x, five_halves_x,
                                                        {1e4, 1e6, 1e8}, 1.0, 1e-3);
  CHECK_FALSE(wrong.pass);
}
