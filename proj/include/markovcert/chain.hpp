#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "markovcert/errors.hpp"
#include "markovcert/quadrature.hpp"
#include "markovcert/rng.hpp"

namespace markovcert {

enum class ChainKind { LinearGaussian1D, CustomKernel };

/// User-pluggable 1-D transition kernel. Both pieces are required: the
/// sampler drives trajectory simulation, the pointwise density drives the
/// Ulam discretization.
struct TransitionKernel {
  std::function<double(double x, StreamRng& rng)> sample;
  std::function<double(double x, double y)> density;  // density of y given x
};

/**
 * A 1-D Markov chain model.
 *
 * LinearGaussian1D is the reference chain x' = alpha x + noise_std w,
 * w ~ N(0,1) iid, with |alpha| < 1. CustomKernel wraps a user kernel.
 * Instances are immutable and safe to share across threads.
 */
class ChainSpec {
 public:
  static ChainSpec linear_gaussian(double alpha, double noise_std = 1.0) {
    if (!(std::abs(alpha) < 1.0)) {
      throw InvalidParameter(
          "ChainSpec: LinearGaussian1D requires |alpha| < 1, got alpha = " +
          std::to_string(alpha));
    }
    if (!(noise_std > 0.0)) {
      throw InvalidParameter("ChainSpec: noise_std must be > 0");
    }
    ChainSpec spec;
    spec.kind_ = ChainKind::LinearGaussian1D;
    spec.alpha_ = alpha;
    spec.noise_std_ = noise_std;
    return spec;
  }

  static ChainSpec custom(TransitionKernel kernel) {
    if (!kernel.sample || !kernel.density) {
      throw InvalidParameter(
          "ChainSpec: custom kernel needs both a sampler and a density");
    }
    ChainSpec spec;
    spec.kind_ = ChainKind::CustomKernel;
    spec.kernel_ = std::move(kernel);
    return spec;
  }

  ChainKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double noise_std() const { return noise_std_; }
  const TransitionKernel& kernel() const { return kernel_; }

  /// One transition step from x.
  double step(double x, StreamRng& rng) const {
    if (kind_ == ChainKind::LinearGaussian1D) {
      return alpha_ * x + noise_std_ * rng.next_normal();
    }
    return kernel_.sample(x, rng);
  }

  /// Transition density p(x, y).
  double transition_density(double x, double y) const {
    if (kind_ == ChainKind::LinearGaussian1D) {
      const double z = (y - alpha_ * x) / noise_std_;
      return std::exp(-0.5 * z * z) / (noise_std_ * std::sqrt(2.0 * M_PI));
    }
    return kernel_.density(x, y);
  }

 private:
  ChainSpec() = default;
  ChainKind kind_ = ChainKind::LinearGaussian1D;
  double alpha_ = 0.0;
  double noise_std_ = 1.0;
  TransitionKernel kernel_;
};

/**
 * Stationary measure of a chain, with the transport-entropy constant
 * attached. te_constant is the constant of the T1 inequality for the
 * *unit-variance* Gaussian reference (the literature's value 1); bound
 * computations scale it by the variance — see effective_te_constant.
 */
struct StationaryMeasure {
  double mean = 0.0;
  double variance = 1.0;
  double te_constant = std::numeric_limits<double>::quiet_NaN();

  double stddev() const { return std::sqrt(variance); }
  bool te_constant_known() const { return std::isfinite(te_constant); }
};

/// Closed-form stationary measure; only the linear-Gaussian chain has one.
inline StationaryMeasure stationary_measure(const ChainSpec& spec) {
  if (spec.kind() != ChainKind::LinearGaussian1D) {
    throw UnsupportedChain(
        "stationary_measure: no closed form for a custom kernel");
  }
  StationaryMeasure mu;
  mu.mean = 0.0;
  mu.variance = spec.noise_std() * spec.noise_std() /
                (1.0 - spec.alpha() * spec.alpha());
  mu.te_constant = 1.0;  // Gaussian, Euclidean metric
  return mu;
}

/// The T1 constant actually used in bounds: variance-scaled by default
/// (a Gaussian N(0,v) is the sqrt(v)-Lipschitz image of N(0,1), and the
/// constant transforms as C -> C Lip^2). Pass force_literal to keep the
/// unscaled constant.
inline double effective_te_constant(const StationaryMeasure& mu,
                                    bool force_literal = false) {
  if (!mu.te_constant_known()) {
    throw UnknownTEConstant("transport-entropy constant unknown");
  }
  return force_literal ? mu.te_constant : mu.te_constant * mu.variance;
}

enum class Metric { Euclidean };

/**
 * An observable r with its Lipschitz seminorm ||r||_{L(d)}.
 * Built-ins (identity, abs, clipped linear) are quadrature-friendly; any
 * callable works for library users.
 */
struct Observable {
  std::function<double(double)> eval;
  double lipschitz_seminorm = 0.0;
  Metric metric = Metric::Euclidean;
  std::string name = "custom";

  double operator()(double x) const { return eval(x); }
};

inline Observable identity_observable() {
  return {[](double x) { return x; }, 1.0, Metric::Euclidean, "identity"};
}

inline Observable abs_observable() {
  return {[](double x) { return std::abs(x); }, 1.0, Metric::Euclidean,
          "abs"};
}

/// Soft-clipped linear observable scale*tanh(x/scale); 1-Lipschitz, bounded
/// by scale in absolute value.
inline Observable clipped_linear_observable(double scale) {
  if (!(scale > 0.0)) {
    throw InvalidParameter("clipped_linear observable: scale must be > 0");
  }
  return {[scale](double x) { return scale * std::tanh(x / scale); }, 1.0,
          Metric::Euclidean, "clipped_linear"};
}

/// mu_pi(r): expectation of the observable under the stationary Gaussian.
/// Composite quadrature with a panel edge at zero; ~1e-13 for built-ins.
inline double expectation(const StationaryMeasure& mu, const Observable& r) {
  return integrate_vs_gaussian(r.eval, mu.mean, mu.variance);
}

enum class InitialKind { Stationary, Gaussian, Dirac };

/**
 * Initial distribution beta of the chain. The certificates price
 * non-stationarity through ||d beta / d mu||_2; Dirac makes that +inf.
 */
struct InitialDistribution {
  InitialKind kind = InitialKind::Stationary;
  double mean = 0.0;      // Gaussian
  double variance = 1.0;  // Gaussian
  double point = 0.0;     // Dirac

  static InitialDistribution stationary() { return {}; }

  static InitialDistribution gaussian(double mean, double variance) {
    if (!(variance > 0.0)) {
      throw InvalidParameter("InitialDistribution: variance must be > 0");
    }
    InitialDistribution beta;
    beta.kind = InitialKind::Gaussian;
    beta.mean = mean;
    beta.variance = variance;
    return beta;
  }

  static InitialDistribution dirac(double point) {
    InitialDistribution beta;
    beta.kind = InitialKind::Dirac;
    beta.point = point;
    return beta;
  }

  std::string describe() const {
    switch (kind) {
      case InitialKind::Stationary:
        return "stationary";
      case InitialKind::Gaussian:
        return "gaussian(" + std::to_string(mean) + ", " +
               std::to_string(variance) + ")";
      case InitialKind::Dirac:
        return "dirac(" + std::to_string(point) + ")";
    }
    return "?";
  }
};

/**
 * ||d beta / d mu||_2 = (integral (d beta/d mu)^2 d mu)^{1/2}.
 *
 * Closed form for Gaussian beta against the Gaussian stationary measure;
 * finite iff 2/var(beta) - 1/var(mu) > 0. A Dirac initial law returns
 * +inf (the certificate is vacuous, not an error); a divergent Gaussian
 * integral throws DivergentRatio.
 */
inline double density_ratio_l2(const InitialDistribution& beta,
                               const StationaryMeasure& mu) {
  switch (beta.kind) {
    case InitialKind::Stationary:
      return 1.0;
    case InitialKind::Dirac:
      return std::numeric_limits<double>::infinity();
    case InitialKind::Gaussian:
      break;
  }
  const double vb = beta.variance;
  const double vu = mu.variance;
  const double c = 1.0 / vb - 0.5 / vu;  // 2 var(mu) > var(beta)
  if (!(c > 0.0)) {
    throw DivergentRatio(
        "density_ratio_l2: chi-square integral diverges (needs "
        "2 var(mu) > var(beta))");
  }
  const double d = beta.mean / vb - 0.5 * mu.mean / vu;
  const double e = beta.mean * beta.mean / vb - 0.5 * mu.mean * mu.mean / vu;
  const double ratio_sq = std::sqrt(2.0 * M_PI * vu) / (2.0 * M_PI * vb) *
                          std::sqrt(M_PI / c) * std::exp(d * d / c - e);
  return std::sqrt(ratio_sq);
}

}  // namespace markovcert
