#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "markovcert/chain.hpp"
#include "markovcert/errors.hpp"
#include "markovcert/parallel.hpp"
#include "markovcert/rng.hpp"
#include "markovcert/stats.hpp"

namespace markovcert {

/**
 * Simulation plan: N recorded steps per trajectory, a number of Monte
 * Carlo replications, a master seed and a burn-in discarded up front.
 */
struct TrajectoryConfig {
  std::int64_t n_steps = 1;
  std::int64_t n_trajectories = 1;
  std::uint64_t seed = 0;
  std::int64_t burn_in = 0;
  unsigned threads = 1;

  static constexpr std::int64_t kBurnInCap = 10'000'000;

  void validate() const {
    if (n_steps < 1) throw InvalidParameter("TrajectoryConfig: n_steps < 1");
    if (n_trajectories < 1) {
      throw InvalidParameter("TrajectoryConfig: n_trajectories < 1");
    }
    if (burn_in < 0 || burn_in >= kBurnInCap) {
      throw InvalidParameter(
          "TrajectoryConfig: burn_in outside [0, " +
          std::to_string(kBurnInCap) + ")");
    }
  }
};

/// Default burn-in: none when started in stationarity, otherwise ten
/// relaxation times ceil(1/(1-|alpha|)). The tail certificates do not need
/// this (they price non-stationarity exactly); it is for marginal sanity
/// checks on simulate tasks.
inline std::int64_t default_burn_in(const ChainSpec& spec,
                                    const InitialDistribution& beta) {
  if (beta.kind == InitialKind::Stationary) return 0;
  if (spec.kind() != ChainKind::LinearGaussian1D) return 0;
  const double relaxation = 1.0 / (1.0 - std::abs(spec.alpha()));
  return 10 * static_cast<std::int64_t>(std::ceil(relaxation));
}

enum class TailSide { OneSidedUpper, TwoSided };

/// Empirical tail estimate with its 95% Wilson score interval.
struct TailEstimate {
  double epsilon = 0.0;
  double empirical_probability = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 1.0;
  std::int64_t n_trajectories = 0;
  TailSide side = TailSide::OneSidedUpper;
  std::int64_t successes = 0;
};

/// Per-trajectory summary row for the CSV emitter
/// (column order fixed: trajectory_index, empirical_average, deviation).
struct TrajectorySummary {
  std::int64_t trajectory_index = 0;
  double empirical_average = 0.0;
  double deviation = 0.0;
};

namespace detail {

inline double draw_initial(const ChainSpec& spec,
                           const InitialDistribution& beta, StreamRng& rng) {
  switch (beta.kind) {
    case InitialKind::Stationary: {
      const StationaryMeasure mu = stationary_measure(spec);
      return rng.next_normal(mu.mean, mu.stddev());
    }
    case InitialKind::Gaussian:
      return rng.next_normal(beta.mean, std::sqrt(beta.variance));
    case InitialKind::Dirac:
      return beta.point;
  }
  return 0.0;
}

}  // namespace detail

/**
 * Simulates trajectory number `trajectory_index` of the plan: draws x_0
 * from beta, discards burn_in transitions, then records n_steps states
 * starting with the current one.
 *
 * The draw sequence is a pure function of (seed, trajectory_index), so
 * distinct indices give independent streams and re-simulation is
 * bit-identical regardless of scheduling.
 */
inline std::vector<double> simulate_trajectory(
    const ChainSpec& spec, const InitialDistribution& beta,
    const TrajectoryConfig& cfg, std::int64_t trajectory_index) {
  cfg.validate();
  if (trajectory_index < 0 || trajectory_index >= cfg.n_trajectories) {
    throw InvalidParameter("simulate_trajectory: index out of range");
  }
  StreamRng rng(cfg.seed, static_cast<std::uint64_t>(trajectory_index));
  double x = detail::draw_initial(spec, beta, rng);
  for (std::int64_t i = 0; i < cfg.burn_in; ++i) x = spec.step(x, rng);
  std::vector<double> out(static_cast<std::size_t>(cfg.n_steps));
  out[0] = x;
  for (std::int64_t i = 1; i < cfg.n_steps; ++i) {
    x = spec.step(x, rng);
    out[static_cast<std::size_t>(i)] = x;
  }
  return out;
}

/// (1/N) sum r(x_i), compensated so the result does not depend on how the
/// trajectory was chunked (to well below 1e-12 relative).
inline double empirical_average(std::span<const double> trajectory,
                                const Observable& r) {
  if (trajectory.empty()) throw EmptyTrajectory("empirical_average");
  CompensatedSum acc;
  for (double x : trajectory) acc.add(r(x));
  return acc.value() / static_cast<double>(trajectory.size());
}

/**
 * Monte Carlo estimate of the deviation tail over cfg.n_trajectories
 * independent trajectories:
 *   one-sided:  fraction with (1/N) sum r(x_i) - mu_pi(r) >= epsilon
 *   two-sided:  fraction with |(1/N) sum r(x_i) - mu_pi(r)| >  epsilon
 *
 * mu_pi(r) is computed by quadrature against the closed-form stationary
 * measure; custom kernels propagate UnsupportedChain. Counting is
 * order-independent, so the estimate is identical for every thread count.
 */
inline TailEstimate estimate_tail(const ChainSpec& spec,
                                  const InitialDistribution& beta,
                                  const Observable& r,
                                  const TrajectoryConfig& cfg, double epsilon,
                                  TailSide side = TailSide::OneSidedUpper,
                                  std::vector<TrajectorySummary>* summaries
                                  = nullptr) {
  cfg.validate();
  const StationaryMeasure mu = stationary_measure(spec);
  const double mu_r = expectation(mu, r);
  const std::size_t count = static_cast<std::size_t>(cfg.n_trajectories);
  std::vector<double> deviations(count);
  parallel_for(count, cfg.threads, [&](std::size_t j) {
    StreamRng rng(cfg.seed, static_cast<std::uint64_t>(j));
    double x = detail::draw_initial(spec, beta, rng);
    for (std::int64_t i = 0; i < cfg.burn_in; ++i) x = spec.step(x, rng);
    CompensatedSum acc;
    acc.add(r(x));
    for (std::int64_t i = 1; i < cfg.n_steps; ++i) {
      x = spec.step(x, rng);
      acc.add(r(x));
    }
    deviations[j] = acc.value() / static_cast<double>(cfg.n_steps) - mu_r;
  });
  std::int64_t hits = 0;
  for (std::size_t j = 0; j < count; ++j) {
    const bool hit = side == TailSide::OneSidedUpper
                         ? deviations[j] >= epsilon
                         : std::abs(deviations[j]) > epsilon;
    hits += hit ? 1 : 0;
  }
  if (summaries != nullptr) {
    summaries->resize(count);
    for (std::size_t j = 0; j < count; ++j) {
      (*summaries)[j] = {static_cast<std::int64_t>(j),
                         deviations[j] + mu_r, deviations[j]};
    }
  }
  TailEstimate est;
  est.epsilon = epsilon;
  est.n_trajectories = cfg.n_trajectories;
  est.successes = hits;
  est.empirical_probability =
      static_cast<double>(hits) / static_cast<double>(count);
  const auto [lo, hi] =
      wilson_interval(static_cast<std::size_t>(hits), count);
  est.wilson_low = lo;
  est.wilson_high = hi;
  est.side = side;
  return est;
}

/// One lag of the empirical autocorrelation diagnostic.
struct AutocorrelationPoint {
  int lag = 0;
  double mean = 0.0;        // across-trajectory mean of rho_hat(lag)
  double standard_error = 0.0;
};

/**
 * Lag-m sample autocorrelation of r(x_k) in stationarity, estimated per
 * trajectory and averaged across cfg.n_trajectories independent
 * replications; the standard error is the across-trajectory one.
 */
inline std::vector<AutocorrelationPoint> autocorrelation(
    const ChainSpec& spec, const Observable& r, const TrajectoryConfig& cfg,
    int max_lag) {
  cfg.validate();
  if (max_lag < 1 || max_lag >= cfg.n_steps) {
    throw InvalidParameter("autocorrelation: bad max_lag");
  }
  const std::size_t count = static_cast<std::size_t>(cfg.n_trajectories);
  const std::size_t lags = static_cast<std::size_t>(max_lag);
  std::vector<std::vector<double>> rho(count);
  const InitialDistribution beta = InitialDistribution::stationary();
  parallel_for(count, cfg.threads, [&](std::size_t j) {
    std::vector<double> traj = simulate_trajectory(
        spec, beta, cfg, static_cast<std::int64_t>(j));
    std::vector<double> y(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) y[i] = r(traj[i]);
    const double m = compensated_mean(y);
    double denom = 0.0;
    for (double v : y) denom += (v - m) * (v - m);
    rho[j].resize(lags);
    for (std::size_t lag = 1; lag <= lags; ++lag) {
      double num = 0.0;
      for (std::size_t i = 0; i + lag < y.size(); ++i) {
        num += (y[i] - m) * (y[i + lag] - m);
      }
      rho[j][lag - 1] = num / denom;
    }
  });
  std::vector<AutocorrelationPoint> out(lags);
  for (std::size_t lag = 0; lag < lags; ++lag) {
    std::vector<double> values(count);
    for (std::size_t j = 0; j < count; ++j) values[j] = rho[j][lag];
    AutocorrelationPoint pt;
    pt.lag = static_cast<int>(lag + 1);
    pt.mean = compensated_mean(values);
    pt.standard_error =
        sample_stddev(values) / std::sqrt(static_cast<double>(count));
    out[lag] = pt;
  }
  return out;
}

/// Pooled mean/variance of the stationary marginal over a block of
/// trajectories; used by marginal sanity checks.
struct MarginalMoments {
  double mean = 0.0;
  double variance = 0.0;
  std::int64_t n_samples = 0;
};

inline MarginalMoments marginal_moments(const ChainSpec& spec,
                                        const InitialDistribution& beta,
                                        const TrajectoryConfig& cfg) {
  cfg.validate();
  const std::size_t count = static_cast<std::size_t>(cfg.n_trajectories);
  std::vector<double> sums(count), sq_sums(count);
  parallel_for(count, cfg.threads, [&](std::size_t j) {
    std::vector<double> traj = simulate_trajectory(
        spec, beta, cfg, static_cast<std::int64_t>(j));
    CompensatedSum s, s2;
    for (double x : traj) {
      s.add(x);
      s2.add(x * x);
    }
    sums[j] = s.value();
    sq_sums[j] = s2.value();
  });
  CompensatedSum total, total_sq;
  for (std::size_t j = 0; j < count; ++j) {
    total.add(sums[j]);
    total_sq.add(sq_sums[j]);
  }
  const double n = static_cast<double>(cfg.n_steps) *
                   static_cast<double>(cfg.n_trajectories);
  MarginalMoments mm;
  mm.n_samples = cfg.n_steps * cfg.n_trajectories;
  mm.mean = total.value() / n;
  mm.variance =
      (total_sq.value() - n * mm.mean * mm.mean) / (n - 1.0);
  return mm;
}

}  // namespace markovcert
