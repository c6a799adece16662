#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bct {

inline constexpr double neg_infinity = -std::numeric_limits<double>::infinity();
inline constexpr double pos_infinity = std::numeric_limits<double>::infinity();

// logistic(t) = e^t / (1 + e^t), evaluated without overflow on either tail.
inline double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

inline double logit(double x) { return std::log(x / (1.0 - x)); }

/// Shannon entropy of a Bernoulli(x) variable, in nats.
/// Endpoints are the continuous limits f(0) = f(1) = 0.
inline double bernoulli_entropy(double x) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("bernoulli_entropy: argument outside [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log(x) - (1.0 - x) * std::log1p(-x);
}

// d/dx of bernoulli_entropy: log((1-x)/x)
inline double bernoulli_entropy_d1(double x) { return std::log((1.0 - x) / x); }

// second derivative: -1 / (x(1-x))
inline double bernoulli_entropy_d2(double x) { return -1.0 / (x * (1.0 - x)); }

// Neumaier-compensated accumulator; keeps long entropy sums accurate to a
// few ulp of the total instead of growing with the term count.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// log C(a, b) via log-gamma; exact 0 for the degenerate cases.
inline double log_binomial(long long a, long long b) {
  if (b < 0 || b > a) return neg_infinity;
  if (b == 0 || b == a) return 0.0;
  return std::lgamma(double(a) + 1.0) - std::lgamma(double(b) + 1.0) -
         std::lgamma(double(a - b) + 1.0);
}

}  // namespace bct
