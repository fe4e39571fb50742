#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "markovcert/chain.hpp"
#include "markovcert/errors.hpp"
#include "markovcert/rng.hpp"
#include "markovcert/stats.hpp"

namespace markovcert {

/**
 * Exact empirical 1-D Wasserstein-1 distance via the monotone (quantile)
 * coupling: (1/m) sum |a_(i) - b_(i)| over equally sized sorted samples.
 */
inline double wasserstein1_1d(std::span<const double> samples_a,
                              std::span<const double> samples_b) {
  if (samples_a.size() != samples_b.size()) {
    throw LengthMismatch("wasserstein1_1d: sample counts differ");
  }
  if (samples_a.empty()) {
    throw LengthMismatch("wasserstein1_1d: empty samples");
  }
  for (std::size_t i = 1; i < samples_a.size(); ++i) {
    if (samples_a[i] < samples_a[i - 1] || samples_b[i] < samples_b[i - 1]) {
      throw InvalidParameter("wasserstein1_1d: samples must be sorted");
    }
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i < samples_a.size(); ++i) {
    acc.add(std::abs(samples_a[i] - samples_b[i]));
  }
  return acc.value() / static_cast<double>(samples_a.size());
}

struct GaussianParams {
  double mean = 0.0;
  double variance = 1.0;
};

/// Closed-form relative entropy Ent(nu || mu) between Gaussians, in nats.
inline double gaussian_relative_entropy(const GaussianParams& nu,
                                        const GaussianParams& mu) {
  if (!(nu.variance > 0.0) || !(mu.variance > 0.0)) {
    throw InvalidParameter("gaussian_relative_entropy: variances must be > 0");
  }
  const double dm = nu.mean - mu.mean;
  return 0.5 * std::log(mu.variance / nu.variance) +
         (nu.variance + dm * dm) / (2.0 * mu.variance) - 0.5;
}

/// One element of a transport-entropy check: either a test measure (direct
/// route) or an (observable, lambda) pair (dual route).
struct TECheckCase {
  std::string label;
  double lhs = 0.0;         // W1 estimate, or empirical exponential moment
  double rhs = 0.0;         // sqrt(2 C Ent), or exp(lambda^2 C ||f||^2 / 2)
  double mc_error = 0.0;    // standard error of the empirical side
  double raw_margin = 0.0;  // rhs - lhs
  double margin = 0.0;      // raw_margin + 3 mc_error (noise allowance)
  bool witness = false;     // margin < 0: violation beyond 3 MC errors
};

/**
 * Transport-entropy check report. A checker can only falsify: margins are
 * the worst noise-adjusted slacks (raw margin + 3 MC standard errors) over
 * the tested family, and a negative margin is exactly a recorded witness.
 */
struct TECheckReport {
  double c_claimed = 0.0;
  double direct_margin = std::numeric_limits<double>::infinity();
  double dual_margin = std::numeric_limits<double>::infinity();
  std::vector<TECheckCase> direct_cases;
  std::vector<TECheckCase> dual_cases;
  std::vector<std::string> witnesses;

  bool consistent() const {
    const double worst = std::min(direct_margin, dual_margin);
    return (worst < 0.0) == !witnesses.empty();
  }
};

/**
 * Direct T1(C) check W1(mu, nu) <= sqrt(2 C Ent(nu||mu)) over a family of
 * Gaussian test measures. W1 is estimated by the monotone coupling with
 * common normal draws (an exact coupling for Gaussians, so the estimator
 * is a plain Monte Carlo mean with the usual standard error); Ent is
 * closed-form. Violations beyond 3 standard errors become witnesses.
 */
inline TECheckReport check_te_direct(const StationaryMeasure& mu, double c,
                                     const std::vector<GaussianParams>& test_family,
                                     std::int64_t samples,
                                     std::uint64_t seed) {
  if (!(c > 0.0)) throw InvalidParameter("check_te_direct: c must be > 0");
  if (samples < 2) throw InvalidParameter("check_te_direct: samples < 2");
  TECheckReport report;
  report.c_claimed = c;
  const double mu_sd = mu.stddev();
  for (std::size_t idx = 0; idx < test_family.size(); ++idx) {
    const GaussianParams& nu = test_family[idx];
    const double ent =
        gaussian_relative_entropy(nu, {mu.mean, mu.variance});
    const double rhs = std::sqrt(2.0 * c * ent);
    const double dm = nu.mean - mu.mean;
    const double ds = std::sqrt(nu.variance) - mu_sd;
    StreamRng rng(seed, idx);
    CompensatedSum sum, sum_sq;
    for (std::int64_t i = 0; i < samples; ++i) {
      const double z = rng.next_normal();
      const double d = std::abs(dm + ds * z);
      sum.add(d);
      sum_sq.add(d * d);
    }
    const double n = static_cast<double>(samples);
    const double w1 = sum.value() / n;
    const double var =
        std::max(0.0, (sum_sq.value() - n * w1 * w1) / (n - 1.0));
    TECheckCase cs;
    cs.label = "nu = N(" + std::to_string(nu.mean) + ", " +
               std::to_string(nu.variance) + ")";
    cs.lhs = w1;
    cs.rhs = rhs;
    cs.mc_error = std::sqrt(var / n);
    cs.raw_margin = rhs - w1;
    cs.margin = cs.raw_margin + 3.0 * cs.mc_error;
    cs.witness = cs.margin < 0.0;
    if (cs.witness) report.witnesses.push_back(cs.label);
    report.direct_margin = std::min(report.direct_margin, cs.margin);
    report.direct_cases.push_back(std::move(cs));
  }
  return report;
}

/**
 * Dual (Bobkov-Goetze) check: the empirical exponential moment
 * E_mu e^{lambda (f - <f>_mu)} against exp(lambda^2 C ||f||_L^2 / 2) for
 * every (observable, lambda) pair. <f>_mu is computed by quadrature.
 * Throws MomentOverflow when the empirical moment leaves double range.
 */
inline TECheckReport check_te_dual(const StationaryMeasure& mu, double c,
                                   const std::vector<Observable>& observables,
                                   const std::vector<double>& lambdas,
                                   std::int64_t samples, std::uint64_t seed) {
  if (!(c > 0.0)) throw InvalidParameter("check_te_dual: c must be > 0");
  if (samples < 2) throw InvalidParameter("check_te_dual: samples < 2");
  TECheckReport report;
  report.c_claimed = c;
  const double mu_sd = mu.stddev();
  std::uint64_t stream = 0;
  for (const Observable& f : observables) {
    if (!std::isfinite(f.lipschitz_seminorm)) {
      throw InvalidParameter("check_te_dual: non-Lipschitz observable");
    }
    const double centered = expectation(mu, f);
    for (double lambda : lambdas) {
      StreamRng rng(seed, stream++);
      CompensatedSum sum, sum_sq;
      for (std::int64_t i = 0; i < samples; ++i) {
        const double x = rng.next_normal(mu.mean, mu_sd);
        const double e = std::exp(lambda * (f(x) - centered));
        if (!std::isfinite(e)) {
          throw MomentOverflow(
              "check_te_dual: exponential moment overflow at lambda = " +
              std::to_string(lambda));
        }
        sum.add(e);
        sum_sq.add(e * e);
      }
      const double n = static_cast<double>(samples);
      const double lhs = sum.value() / n;
      if (!std::isfinite(lhs)) {
        throw MomentOverflow("check_te_dual: exponential moment overflow");
      }
      const double var =
          std::max(0.0, (sum_sq.value() - n * lhs * lhs) / (n - 1.0));
      const double rhs = std::exp(0.5 * lambda * lambda * c *
                                  f.lipschitz_seminorm *
                                  f.lipschitz_seminorm);
      TECheckCase cs;
      cs.label = "f = " + f.name + ", lambda = " + std::to_string(lambda);
      cs.lhs = lhs;
      cs.rhs = rhs;
      cs.mc_error = std::sqrt(var / n);
      cs.raw_margin = rhs - lhs;
      cs.margin = cs.raw_margin + 3.0 * cs.mc_error;
      cs.witness = cs.margin < 0.0;
      if (cs.witness) report.witnesses.push_back(cs.label);
      report.dual_margin = std::min(report.dual_margin, cs.margin);
      report.dual_cases.push_back(std::move(cs));
    }
  }
  return report;
}

/// Stress family from the design ledger: mean shifts of +-{0.5, 1, 2}
/// standard deviations and variance scalings {0.5, 2}, which include the
/// known saturating cases for a Gaussian reference measure.
inline std::vector<GaussianParams> default_te_direct_family(
    const StationaryMeasure& mu) {
  const double sd = mu.stddev();
  std::vector<GaussianParams> family;
  for (double shift : {0.5, 1.0, 2.0}) {
    family.push_back({mu.mean + shift * sd, mu.variance});
    family.push_back({mu.mean - shift * sd, mu.variance});
  }
  family.push_back({mu.mean, 0.5 * mu.variance});
  family.push_back({mu.mean, 2.0 * mu.variance});
  return family;
}

inline std::vector<Observable> default_te_dual_observables() {
  return {identity_observable(), abs_observable(),
          clipped_linear_observable(2.0)};
}

inline std::vector<double> default_te_dual_lambdas() {
  return {0.25, 0.5, 1.0};
}

}  // namespace markovcert
