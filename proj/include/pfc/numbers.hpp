#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace pfc {

// Counts are exact arbitrary-precision naturals; fitted coefficients and
// derived limits are exact rationals.
using Natural = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Largest r >= 0 with r^k <= x. Requires x >= 0 and k >= 1.
Natural integer_kth_root(const Natural& x, unsigned k);

// Exact k-th root of a nonnegative rational, when one exists.
std::optional<Rational> exact_kth_root(const Rational& x, unsigned k);

double to_double(const Rational& x);
double to_double(const Natural& x);

// "p" when the denominator is 1, otherwise "p/q" (canonical reduced form).
std::string to_string(const Rational& x);
std::string to_string(const Natural& x);

}  // namespace pfc
