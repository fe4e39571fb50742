#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "markovcert/chain.hpp"
#include "markovcert/errors.hpp"
#include "markovcert/quadrature.hpp"
#include "markovcert/rng.hpp"
#include "markovcert/stats.hpp"

namespace markovcert {

enum class BasisKind { HermiteStationary, UlamPartition };

/**
 * Finite-dimensional Galerkin image of the Markov transition operator P.
 *
 * HermiteStationary: entries <P h_k, h_j> in the orthonormal Hermite
 * polynomial basis of the stationary Gaussian; coordinates are L^2(mu_pi)
 * coordinates, row/column 0 is the constant function.
 *
 * UlamPartition: row-stochastic cell-to-cell transition probabilities on
 * the partition induced by the breakpoints (two unbounded end cells).
 */
struct GalerkinOperator {
  Eigen::MatrixXd matrix;
  BasisKind basis = BasisKind::HermiteStationary;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double stationary_variance = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> breakpoints;

  int size() const { return static_cast<int>(matrix.rows()); }
};

/// Largest singular value (dense operator 2-norm).
inline double operator_two_norm(const Eigen::MatrixXd& m) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

/**
 * Hermite-Galerkin discretization of the linear-Gaussian chain.
 *
 * Entries M[j][k] = <P h_k, h_j>_{mu_pi} by nested Gauss-Hermite
 * quadrature of order 4K (inner integral over the noise, outer over the
 * stationary measure); exact for the polynomial integrands involved.
 * Throws QuadratureFailure if the basis orthonormality self-test exceeds
 * 1e-8.
 */
inline GalerkinOperator hermite_galerkin(const ChainSpec& spec, int K) {
  if (spec.kind() != ChainKind::LinearGaussian1D) {
    throw UnsupportedChain("hermite_galerkin: needs the Gaussian chain");
  }
  if (K < 2) throw InvalidParameter("hermite_galerkin: K < 2");
  const StationaryMeasure mu = stationary_measure(spec);
  const double sigma = mu.stddev();
  const int order = std::max(4 * K, 16);
  const QuadratureRule& rule = gauss_hermite(order);
  const double alpha = spec.alpha();
  const double noise_scale = std::sqrt(2.0) * spec.noise_std();
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);

  // Keep only nodes with non-underflowed weight; they carry all the mass
  // and skipping the rest avoids inf*0 in the basis recurrence.
  std::vector<int> live;
  live.reserve(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    if (rule.weights[i] > 0.0) live.push_back(static_cast<int>(i));
  }
  const int Q = static_cast<int>(live.size());

  Eigen::VectorXd w(Q);
  Eigen::MatrixXd basis(Q, K);   // h_k at the outer nodes
  Eigen::MatrixXd applied(Q, K); // (P h_k) at the outer nodes
  std::vector<double> values(static_cast<std::size_t>(K));
  for (int i = 0; i < Q; ++i) {
    const double x = std::sqrt(2.0) * sigma * rule.nodes[live[i]];
    w(i) = rule.weights[live[i]] * inv_sqrt_pi;
    hermite_orthonormal_values(x / sigma, K, values.data());
    for (int k = 0; k < K; ++k) basis(i, k) = values[k];
    Eigen::RowVectorXd inner = Eigen::RowVectorXd::Zero(K);
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double wj = rule.weights[j];
      if (wj == 0.0) continue;
      const double y = alpha * x + noise_scale * rule.nodes[j];
      hermite_orthonormal_values(y / sigma, K, values.data());
      for (int k = 0; k < K; ++k) inner(k) += wj * values[k];
    }
    applied.row(i) = inner * inv_sqrt_pi;
  }

  const Eigen::MatrixXd gram =
      basis.transpose() * w.asDiagonal() * basis;
  const double gram_err =
      (gram - Eigen::MatrixXd::Identity(K, K)).cwiseAbs().maxCoeff();
  if (!(gram_err <= 1e-8)) {
    throw QuadratureFailure(
        "hermite_galerkin: basis orthonormality self-test failed, |Gram - "
        "I| = " +
        std::to_string(gram_err));
  }

  GalerkinOperator op;
  op.matrix = basis.transpose() * w.asDiagonal() * applied;
  op.basis = BasisKind::HermiteStationary;
  op.alpha = alpha;
  op.stationary_variance = mu.variance;
  return op;
}

/// n_cells - 1 evenly spaced breakpoints spanning [lo, hi]; the induced
/// partition has n_cells cells, the outer two unbounded.
inline std::vector<double> uniform_breakpoints(double lo, double hi,
                                               int n_cells) {
  if (n_cells < 2 || !(hi > lo)) {
    throw InvalidParameter("uniform_breakpoints: need n_cells >= 2, hi > lo");
  }
  std::vector<double> bps(static_cast<std::size_t>(n_cells - 1));
  for (int i = 0; i < n_cells - 1; ++i) {
    bps[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) /
                 static_cast<double>(n_cells - 2 > 0 ? n_cells - 2 : 1);
  }
  return bps;
}

/**
 * Ulam discretization: row i estimates the transition law out of cell i
 * from samples_per_cell stratified starting points (stationary-quantile
 * midpoints for the Gaussian chain, uniform midpoints for custom kernels),
 * one sampled transition each. Rows are renormalized to sum 1.
 */
inline GalerkinOperator ulam_discretize(const ChainSpec& spec,
                                        std::vector<double> breakpoints,
                                        int samples_per_cell,
                                        std::uint64_t seed) {
  if (breakpoints.empty()) {
    throw InvalidParameter("ulam_discretize: need >= 2 cells");
  }
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] > breakpoints[i - 1])) {
      throw InvalidParameter(
          "ulam_discretize: breakpoints must be strictly increasing");
    }
  }
  if (samples_per_cell < 1) {
    throw InvalidParameter("ulam_discretize: samples_per_cell < 1");
  }
  const int n_cells = static_cast<int>(breakpoints.size()) + 1;
  const bool gaussian = spec.kind() == ChainKind::LinearGaussian1D;
  double mean = 0.0;
  double sigma = 1.0;
  if (gaussian) {
    const StationaryMeasure mu = stationary_measure(spec);
    mean = mu.mean;
    sigma = mu.stddev();
  }
  auto cell_lo = [&](int i) {
    return i == 0 ? -std::numeric_limits<double>::infinity()
                  : breakpoints[static_cast<std::size_t>(i - 1)];
  };
  auto cell_hi = [&](int i) {
    return i == n_cells - 1 ? std::numeric_limits<double>::infinity()
                            : breakpoints[static_cast<std::size_t>(i)];
  };
  auto landing_cell = [&](double y) {
    const auto it =
        std::lower_bound(breakpoints.begin(), breakpoints.end(), y);
    return static_cast<int>(it - breakpoints.begin());
  };

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_cells, n_cells);
  const double s = static_cast<double>(samples_per_cell);
  for (int i = 0; i < n_cells; ++i) {
    const double lo = cell_lo(i);
    const double hi = cell_hi(i);
    StreamRng rng(seed, static_cast<std::uint64_t>(i));
    std::vector<double> starts(static_cast<std::size_t>(samples_per_cell));
    if (gaussian) {
      const double plo = normal_cdf((lo - mean) / sigma);
      const double phi = normal_cdf((hi - mean) / sigma);
      if (!(phi > plo)) {
        throw EmptyCell("ulam_discretize: cell " + std::to_string(i) +
                        " has no resolvable stationary mass");
      }
      for (int t = 0; t < samples_per_cell; ++t) {
        const double p = plo + (phi - plo) * (t + 0.5) / s;
        starts[static_cast<std::size_t>(t)] =
            mean + sigma * normal_quantile(p);
      }
    } else {
      double a = lo;
      double b = hi;
      const double fallback =
          breakpoints.size() > 1
              ? breakpoints[1] - breakpoints[0]
              : 1.0;
      if (!std::isfinite(a)) a = b - fallback;
      if (!std::isfinite(b)) b = a + fallback;
      for (int t = 0; t < samples_per_cell; ++t) {
        starts[static_cast<std::size_t>(t)] = a + (b - a) * (t + 0.5) / s;
      }
    }
    for (double x : starts) {
      const double y = spec.step(x, rng);
      m(i, landing_cell(y)) += 1.0;
    }
    const double row_sum = m.row(i).sum();
    if (!(row_sum > 0.0)) {
      throw EmptyCell("ulam_discretize: no transitions recorded from cell " +
                      std::to_string(i));
    }
    m.row(i) /= row_sum;
  }

  GalerkinOperator op;
  op.matrix = std::move(m);
  op.basis = BasisKind::UlamPartition;
  op.breakpoints = std::move(breakpoints);
  if (gaussian) {
    op.alpha = spec.alpha();
    op.stationary_variance = sigma * sigma;
  }
  return op;
}

/// Spectral diagnostics of a discretized transfer operator.
struct SpectralReport {
  std::vector<double> eigenvalue_moduli;  // sorted descending
  double perron_modulus = 0.0;
  double spectral_gap = 0.0;              // 1 - second largest modulus
  bool aperiodic = true;  // no non-Perron modulus within 1e-6 of 1
  std::vector<std::pair<int, double>> power_convergence;  // (n, ||P^n - U||)
};

namespace detail {

/// Left Perron vector of a row-stochastic matrix by power iteration.
inline Eigen::VectorXd left_perron(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);
  for (int iter = 0; iter < 20000; ++iter) {
    Eigen::VectorXd next = m.transpose() * pi;
    next = next.cwiseMax(0.0);
    const double total = next.sum();
    if (!(total > 0.0)) break;
    next /= total;
    const double delta = (next - pi).cwiseAbs().maxCoeff();
    pi = next;
    if (delta < 1e-15) break;
  }
  return pi;
}

}  // namespace detail

/**
 * Dense eigensolve plus power-convergence measurements ||P^n - U||, where
 * U is the rank-one projection onto constants in the mu_pi-weighted inner
 * product. For the Hermite basis the coordinates are already orthonormal
 * in L^2(mu_pi); for Ulam the norm is weighted by the matrix's own
 * stationary cell distribution.
 */
inline SpectralReport spectral_report(const GalerkinOperator& op,
                                      int max_power) {
  const int n = op.size();
  if (n < 1) throw InvalidParameter("spectral_report: empty operator");
  if (max_power < 0) throw InvalidParameter("spectral_report: max_power < 0");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(op.matrix,
                                             /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw EigensolveFailure("spectral_report: eigensolve did not converge");
  }
  SpectralReport report;
  report.eigenvalue_moduli.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    report.eigenvalue_moduli[static_cast<std::size_t>(i)] =
        std::abs(solver.eigenvalues()(i));
  }
  std::sort(report.eigenvalue_moduli.begin(), report.eigenvalue_moduli.end(),
            std::greater<double>());
  report.perron_modulus = report.eigenvalue_moduli.front();
  const double second =
      n > 1 ? report.eigenvalue_moduli[1] : 0.0;
  report.spectral_gap = std::clamp(1.0 - second, 0.0, 1.0);
  int near_unit = 0;
  for (double mod : report.eigenvalue_moduli) {
    if (mod >= 1.0 - 1e-6) ++near_unit;
  }
  report.aperiodic = near_unit <= 1;

  Eigen::MatrixXd u;
  Eigen::VectorXd scale_fwd;  // D^{1/2}
  Eigen::VectorXd scale_inv;  // D^{-1/2}
  bool weighted = false;
  if (op.basis == BasisKind::HermiteStationary) {
    u = Eigen::MatrixXd::Zero(n, n);
    u(0, 0) = 1.0;
  } else {
    Eigen::VectorXd pi = detail::left_perron(op.matrix);
    pi = pi.cwiseMax(1e-300);
    u = Eigen::VectorXd::Ones(n) * pi.transpose();
    scale_fwd = pi.cwiseSqrt();
    scale_inv = scale_fwd.cwiseInverse();
    weighted = true;
  }
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= max_power; ++k) {
    power = power * op.matrix;
    Eigen::MatrixXd diff = power - u;
    if (weighted) {
      diff = scale_fwd.asDiagonal() * diff * scale_inv.asDiagonal();
    }
    report.power_convergence.emplace_back(k, operator_two_norm(diff));
  }
  return report;
}

/**
 * Numerical lower bound on ||P||_{2->q}: the maximum of ||P g||_q over the
 * constant function and n_test_functions random unit-norm polynomials of
 * degree <= 6 (coefficients drawn in the orthonormal Hermite basis). Since
 * P1 = 1 the probe is always >= 1 up to quadrature error.
 */
inline double hyperbound_probe(const ChainSpec& spec, double q,
                               int n_test_functions, std::uint64_t seed) {
  if (spec.kind() != ChainKind::LinearGaussian1D) {
    throw UnsupportedChain("hyperbound_probe: needs the Gaussian chain");
  }
  if (!(q > 2.0)) throw InvalidExponent("hyperbound_probe: q must be > 2");
  if (n_test_functions < 0) {
    throw InvalidParameter("hyperbound_probe: negative test count");
  }
  const StationaryMeasure mu = stationary_measure(spec);
  const double sigma = mu.stddev();
  const double alpha = spec.alpha();
  constexpr int kDegree = 6;
  constexpr int kCoeffs = kDegree + 1;
  const QuadratureRule& inner = gauss_hermite(16);
  const double noise_scale = std::sqrt(2.0) * spec.noise_std();
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);

  auto p_applied = [&](const std::array<double, kCoeffs>& c, double x) {
    double acc = 0.0;
    double values[kCoeffs];
    for (std::size_t j = 0; j < inner.nodes.size(); ++j) {
      const double y = alpha * x + noise_scale * inner.nodes[j];
      hermite_orthonormal_values(y / sigma, kCoeffs, values);
      double g = 0.0;
      for (int k = 0; k < kCoeffs; ++k) g += c[static_cast<std::size_t>(k)] * values[k];
      acc += inner.weights[j] * g;
    }
    return acc * inv_sqrt_pi;
  };
  auto q_norm = [&](const std::array<double, kCoeffs>& c) {
    const double integral = integrate_vs_gaussian(
        [&](double x) { return std::pow(std::abs(p_applied(c, x)), q); },
        mu.mean, mu.variance);
    return std::pow(integral, 1.0 / q);
  };

  std::array<double, kCoeffs> coeffs{};
  coeffs[0] = 1.0;  // the constant witness: ||P 1||_q = 1
  double best = q_norm(coeffs);
  for (int t = 0; t < n_test_functions; ++t) {
    StreamRng rng(seed, static_cast<std::uint64_t>(t));
    double norm_sq = 0.0;
    for (int k = 0; k < kCoeffs; ++k) {
      coeffs[static_cast<std::size_t>(k)] = rng.next_normal();
      norm_sq += coeffs[static_cast<std::size_t>(k)] *
                 coeffs[static_cast<std::size_t>(k)];
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& c : coeffs) c *= inv;
    best = std::max(best, q_norm(coeffs));
  }
  return best;
}

/// Result of the Feynman-Kac composition e^{s r} P in the Hermite basis.
struct FeynmanKacMatrix {
  Eigen::MatrixXd matrix;
  bool truncation_warning = false;
  double tail_mass = 0.0;  // relative Frobenius mass outside the K x K block
};

/**
 * Galerkin matrix of the Feynman-Kac composition e^{s r} P: the
 * multiplication-operator matrix E[j][k] = <e^{s r} h_k, h_j> times the
 * operator matrix. E is assembled at size 2K and truncated; the discarded
 * relative Frobenius mass is reported, with a warning flag above 1e-4
 * (the untruncated multiplication operator is unbounded, so the
 * truncation diagnostic is part of the contract).
 */
inline FeynmanKacMatrix feynman_kac_matrix(const GalerkinOperator& op,
                                           const Observable& r, double s) {
  if (op.basis != BasisKind::HermiteStationary) {
    throw InvalidParameter("feynman_kac_matrix: needs a Hermite operator");
  }
  if (!(s >= 0.0)) throw InvalidParameter("feynman_kac_matrix: s < 0");
  if (!std::isfinite(r.lipschitz_seminorm)) {
    throw InvalidParameter("feynman_kac_matrix: non-Lipschitz observable");
  }
  FeynmanKacMatrix result;
  if (s == 0.0) {
    result.matrix = op.matrix;
    return result;
  }
  const int K = op.size();
  const int K2 = 2 * K;
  const double v = op.stationary_variance;
  const double sigma = std::sqrt(v);

  GaussianIntegrationOptions opts;
  const double tilt = s * r.lipschitz_seminorm * v;  // e^{sr} mass shift
  opts.shift_lo = -tilt;
  opts.shift_hi = tilt;
  // Materialize the composite nodes once; E = B^T diag(phi) B.
  std::vector<double> xs;
  std::vector<double> ws;
  {
    const double lo = -opts.halfwidth_sigmas * sigma + opts.shift_lo;
    const double hi = opts.halfwidth_sigmas * sigma + opts.shift_hi;
    const QuadratureRule& rule = gauss_legendre(opts.panel_order);
    const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
    auto add_panels = [&](double a, double b) {
      const double step = (b - a) / opts.panels_per_side;
      for (int p = 0; p < opts.panels_per_side; ++p) {
        const double plo = a + p * step;
        const double phi = a + (p + 1) * step;
        const double half = 0.5 * (phi - plo);
        const double mid = 0.5 * (phi + plo);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
          const double x = mid + half * rule.nodes[i];
          const double z = x / sigma;
          xs.push_back(x);
          ws.push_back(rule.weights[i] * half * inv_norm *
                       std::exp(-0.5 * z * z));
        }
      }
    };
    add_panels(lo, 0.0);
    add_panels(0.0, hi);
  }
  const int n_nodes = static_cast<int>(xs.size());
  Eigen::MatrixXd basis(n_nodes, K2);
  Eigen::VectorXd phi(n_nodes);
  std::vector<double> values(static_cast<std::size_t>(K2));
  for (int i = 0; i < n_nodes; ++i) {
    hermite_orthonormal_values(xs[static_cast<std::size_t>(i)] / sigma, K2,
                               values.data());
    for (int k = 0; k < K2; ++k) basis(i, k) = values[static_cast<std::size_t>(k)];
    phi(i) = ws[static_cast<std::size_t>(i)] *
             std::exp(s * r(xs[static_cast<std::size_t>(i)]));
  }
  const Eigen::MatrixXd mult_full =
      basis.transpose() * phi.asDiagonal() * basis;
  const Eigen::MatrixXd mult = mult_full.topLeftCorner(K, K);
  const double full_norm = mult_full.norm();
  const double kept_norm = mult.norm();
  const double discarded =
      std::sqrt(std::max(0.0, full_norm * full_norm - kept_norm * kept_norm));
  result.tail_mass = full_norm > 0.0 ? discarded / full_norm : 0.0;
  result.truncation_warning = result.tail_mass > 1e-4;
  result.matrix = mult * op.matrix;
  return result;
}

}  // namespace markovcert
