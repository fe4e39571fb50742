#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>

#include "markovcert/errors.hpp"

namespace markovcert {

/// Neumaier-compensated accumulator; the sum of a sequence is independent
/// of how it was chunked to well below 1e-12 relative.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  void merge(const CompensatedSum& other) {
    add(other.sum_);
    comp_ += other.comp_;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_mean(std::span<const double> xs) {
  if (xs.empty()) throw EmptyTrajectory("mean of an empty sequence");
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value() / static_cast<double>(xs.size());
}

/// Two-pass sample variance (unbiased, divisor n-1).
inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw EmptyTrajectory("variance needs >= 2 samples");
  const double m = compensated_mean(xs);
  CompensatedSum acc;
  for (double x : xs) acc.add((x - m) * (x - m));
  return acc.value() / static_cast<double>(xs.size() - 1);
}

inline double sample_stddev(std::span<const double> xs) {
  return std::sqrt(sample_variance(xs));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/**
 * Inverse standard normal CDF.
 *
 * Acklam's rational approximation refined with one Halley step against
 * erfc; absolute error below 1e-14 over (1e-300, 1-1e-16).
 */
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw InvalidParameter("normal_quantile: p outside [0,1]");
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

/// 95% two-sided normal critical value, pinned so reports are stable.
inline constexpr double kWilsonZ95 = 1.959963984540054;

/**
 * Wilson score interval for a binomial proportion; valid near 0 and 1
 * where the Wald interval degenerates.
 */
inline std::pair<double, double> wilson_interval(std::size_t successes,
                                                 std::size_t trials,
                                                 double z = kWilsonZ95) {
  if (trials == 0) throw InvalidParameter("wilson_interval: zero trials");
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = phat + z2 / (2.0 * n);
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  double lo = (center - half) / denom;
  double hi = (center + half) / denom;
  if (lo < 0.0) lo = 0.0;
  if (hi > 1.0) hi = 1.0;
  return {lo, hi};
}

}  // namespace markovcert
