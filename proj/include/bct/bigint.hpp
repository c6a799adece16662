#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "bct/numeric.hpp"

namespace bct {

using bigint = boost::multiprecision::cpp_int;

// Exact binomial coefficient.
inline bigint binomial_big(long long a, long long b) {
  if (b < 0 || b > a) return 0;
  b = std::min(b, a - b);
  bigint r = 1;
  for (long long i = 1; i <= b; ++i) {
    r *= (a - b + i);
    r /= i;
  }
  return r;
}

// Natural log of a positive big integer. Large values are scaled by a power
// of two before conversion so the double mantissa is never overflowed.
inline double log_big(const bigint& x) {
  if (x <= 0) return x == 0 ? neg_infinity : std::numeric_limits<double>::quiet_NaN();
  const auto bits = boost::multiprecision::msb(x);
  if (bits < 960) return std::log(x.convert_to<double>());
  const unsigned shift = bits - 900;
  const bigint reduced = x >> shift;
  return std::log(reduced.convert_to<double>()) + double(shift) * M_LN2;
}

}  // namespace bct
