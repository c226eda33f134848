#include "pfc/numbers.hpp"

#include <stdexcept>

namespace pfc {

Natural integer_kth_root(const Natural& x, unsigned k) {
  if (x < 0 || k == 0) throw std::invalid_argument("integer_kth_root: need x >= 0, k >= 1");
  if (k == 1 || x < 2) return x;
  Natural hi = 1;
  while (boost::multiprecision::pow(hi, k) <= x) hi <<= 1;
  Natural lo = hi >> 1;  // lo^k <= x < hi^k
  while (hi - lo > 1) {
    Natural mid = (lo + hi) >> 1;
    if (boost::multiprecision::pow(mid, k) <= x)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

std::optional<Rational> exact_kth_root(const Rational& x, unsigned k) {
  if (x < 0 || k == 0) return std::nullopt;
  const Natural num = boost::multiprecision::numerator(x);
  const Natural den = boost::multiprecision::denominator(x);
  const Natural rn = integer_kth_root(num, k);
  const Natural rd = integer_kth_root(den, k);
  if (boost::multiprecision::pow(rn, k) != num) return std::nullopt;
  if (boost::multiprecision::pow(rd, k) != den) return std::nullopt;
  return Rational(rn, rd);
}

double to_double(const Rational& x) { return x.convert_to<double>(); }
double to_double(const Natural& x) { return x.convert_to<double>(); }

std::string to_string(const Rational& x) {
  const Natural den = boost::multiprecision::denominator(x);
  if (den == 1) return boost::multiprecision::numerator(x).str();
  return boost::multiprecision::numerator(x).str() + "/" + den.str();
}

std::string to_string(const Natural& x) { return x.str(); }

}  // namespace pfc
