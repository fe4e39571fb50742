#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "markovcert/errors.hpp"

namespace markovcert {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

/// Golub-Welsch: nodes/weights from the symmetric tridiagonal Jacobi matrix.
inline QuadratureRule golub_welsch(const Eigen::VectorXd& diag,
                                   const Eigen::VectorXd& subdiag,
                                   double total_weight) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, subdiag, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw QuadratureFailure("Golub-Welsch eigensolve did not converge");
  }
  const int n = static_cast<int>(diag.size());
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = total_weight * v0 * v0;
  }
  return rule;
}

inline const QuadratureRule& cached_rule(
    std::map<int, QuadratureRule>& cache, std::mutex& mutex, int order,
    QuadratureRule (*build)(int)) {
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build(order)).first;
  return it->second;
}

inline QuadratureRule build_gauss_hermite(int order) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(order - 1);
  for (int k = 1; k < order; ++k) sub(k - 1) = std::sqrt(0.5 * k);
  return golub_welsch(diag, sub, std::sqrt(M_PI));
}

inline QuadratureRule build_gauss_legendre(int order) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(order - 1);
  for (int k = 1; k < order; ++k) {
    sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  }
  return golub_welsch(diag, sub, 2.0);
}

}  // namespace detail

/// Gauss-Hermite rule for weight e^{-x^2}; exact through degree 2n-1.
inline const QuadratureRule& gauss_hermite(int order) {
  if (order < 1) throw InvalidParameter("gauss_hermite: order < 1");
  static std::map<int, QuadratureRule> cache;
  static std::mutex mutex;
  return detail::cached_rule(cache, mutex, order,
                             &detail::build_gauss_hermite);
}

/// Gauss-Legendre rule on [-1, 1]; exact through degree 2n-1.
inline const QuadratureRule& gauss_legendre(int order) {
  if (order < 1) throw InvalidParameter("gauss_legendre: order < 1");
  static std::map<int, QuadratureRule> cache;
  static std::mutex mutex;
  return detail::cached_rule(cache, mutex, order,
                             &detail::build_gauss_legendre);
}

/**
 * Integral of f against N(mean, variance) via Gauss-Hermite.
 * Exact (to rounding) for polynomial f of degree <= 2*order - 1.
 * Nodes whose weight underflowed to zero are skipped; their true
 * contribution is below 1e-300 of the total.
 */
template <typename F>
double integrate_gauss_hermite(F&& f, double mean, double variance,
                               int order) {
  const QuadratureRule& rule = gauss_hermite(order);
  const double scale = std::sqrt(2.0 * variance);
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double w = rule.weights[i];
    if (w == 0.0) continue;
    acc += w * f(mean + scale * rule.nodes[i]);
  }
  return acc * inv_sqrt_pi;
}

template <typename F>
double integrate_gauss_legendre(F&& f, double lo, double hi, int order) {
  const QuadratureRule& rule = gauss_legendre(order);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return acc * half;
}

struct GaussianIntegrationOptions {
  int panels_per_side = 48;   // composite panels between each pair of edges
  int panel_order = 24;       // Gauss-Legendre order per panel
  double halfwidth_sigmas = 14.0;
  double shift_lo = 0.0;      // widens the range to the left (<= 0)
  double shift_hi = 0.0;      // widens the range to the right (>= 0)
  bool split_at_zero = true;  // pin a panel edge at x = 0 (|x|-type kinks)
};

/**
 * Integral of f(x) against the N(mean, variance) density by composite
 * Gauss-Legendre over mean +- 14 sigma (plus any requested shift).
 *
 * Unlike Gauss-Hermite this handles integrands with a kink at zero
 * (|x|, soft clips) and exponential tilts e^{s r} to ~1e-13: the range is
 * widened by the tilt's effective shift and a panel edge sits at 0.
 */
template <typename F>
double integrate_vs_gaussian(F&& f, double mean, double variance,
                             const GaussianIntegrationOptions& opts = {}) {
  if (!(variance > 0.0)) {
    throw InvalidParameter("integrate_vs_gaussian: variance must be > 0");
  }
  const double sigma = std::sqrt(variance);
  const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
  const double lo = mean - opts.halfwidth_sigmas * sigma + opts.shift_lo;
  const double hi = mean + opts.halfwidth_sigmas * sigma + opts.shift_hi;
  auto weighted = [&](double x) {
    const double z = (x - mean) / sigma;
    return f(x) * inv_norm * std::exp(-0.5 * z * z);
  };
  auto sweep = [&](double a, double b) {
    if (!(b > a)) return 0.0;
    const double step = (b - a) / opts.panels_per_side;
    double acc = 0.0;
    for (int p = 0; p < opts.panels_per_side; ++p) {
      acc += integrate_gauss_legendre(weighted, a + p * step,
                                      a + (p + 1) * step, opts.panel_order);
    }
    return acc;
  };
  if (opts.split_at_zero && lo < 0.0 && hi > 0.0) {
    return sweep(lo, 0.0) + sweep(0.0, hi);
  }
  return sweep(lo, hi);
}

/**
 * Values of the first `count` orthonormal Hermite polynomials of N(0,1)
 * at u: h_0 = 1, h_1 = u, h_{k+1} = (u h_k - sqrt(k) h_{k-1})/sqrt(k+1).
 * For N(0, v) use u = x / sqrt(v); the family is orthonormal in L^2.
 */
inline void hermite_orthonormal_values(double u, int count, double* out) {
  if (count <= 0) return;
  out[0] = 1.0;
  if (count == 1) return;
  out[1] = u;
  for (int k = 1; k + 1 < count; ++k) {
    out[k + 1] =
        (u * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) /
        std::sqrt(static_cast<double>(k + 1));
  }
}

inline std::vector<double> hermite_orthonormal_values(double u, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  hermite_orthonormal_values(u, count, out.data());
  return out;
}

}  // namespace markovcert
