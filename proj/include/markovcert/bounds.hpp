#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "markovcert/chain.hpp"
#include "markovcert/errors.hpp"

namespace markovcert {

enum class Theorem {
  MultOpNorm,
  ChernoffFK,
  HyperboundedSampleComplexity,
  HypercontractiveTail,
  GaussianHyperbound,
};

inline const char* theorem_name(Theorem t) {
  switch (t) {
    case Theorem::MultOpNorm:
      return "MultOpNorm";
    case Theorem::ChernoffFK:
      return "ChernoffFK";
    case Theorem::HyperboundedSampleComplexity:
      return "HyperboundedSampleComplexity";
    case Theorem::HypercontractiveTail:
      return "HypercontractiveTail";
    case Theorem::GaussianHyperbound:
      return "GaussianHyperbound";
  }
  return "?";
}

struct PreconditionCheck {
  std::string condition;
  bool holds = false;
};

/**
 * A computed bound with everything needed to re-derive it: which theorem,
 * every constant used, the raw value, and the precondition report whose
 * conjunction defines validity. Tail-probability certificates additionally
 * carry min(value, 1) and a vacuity flag — a bound above 1 is flagged,
 * never hidden.
 */
struct ConcentrationCertificate {
  Theorem theorem = Theorem::MultOpNorm;
  std::map<std::string, double> inputs;
  double value = 0.0;
  double value_clamped = 0.0;
  bool is_tail_probability = false;
  bool vacuous = false;
  bool valid = false;
  std::vector<PreconditionCheck> precondition_report;
};

namespace detail {

inline void finalize(ConcentrationCertificate& cert) {
  cert.valid = true;
  for (const PreconditionCheck& pc : cert.precondition_report) {
    cert.valid = cert.valid && pc.holds;
  }
  if (cert.is_tail_probability) {
    cert.value_clamped = std::min(cert.value, 1.0);
    cert.vacuous = !(cert.value < 1.0);
  } else {
    cert.value_clamped = cert.value;
    cert.vacuous = false;
  }
}

/// Golden-section minimizer of a convex function on [lo, hi].
template <typename F>
double golden_section_min(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/**
 * Norm bound on the exponentiated multiplication operator,
 * e^r : L^p -> L^2:
 *
 *   ||e^r||_{p->2} <= exp( mu_pi(r) + 2 p C ||r||_L^2 / ((p-2) 2) ).
 *
 * C is the effective transport-entropy constant (variance-scaled by
 * default; pass c_override to force another value, e.g. the literal 1).
 */
inline ConcentrationCertificate mult_op_norm_bound(
    const StationaryMeasure& mu, const Observable& r, double p,
    std::optional<double> c_override = std::nullopt) {
  if (!(p > 2.0)) throw InvalidExponent("mult_op_norm_bound: p must be > 2");
  if (!c_override && !mu.te_constant_known()) {
    throw UnknownTEConstant("mult_op_norm_bound: T-E constant unknown");
  }
  const double c = c_override ? *c_override : effective_te_constant(mu);
  const double lip = r.lipschitz_seminorm;
  const double mu_r = expectation(mu, r);
  ConcentrationCertificate cert;
  cert.theorem = Theorem::MultOpNorm;
  cert.inputs = {{"p", p},
                 {"c_pi", c},
                 {"lipschitz", lip},
                 {"mu_r", mu_r},
                 {"variance", mu.variance}};
  cert.precondition_report = {
      {"p > 2", p > 2.0},
      {"lipschitz seminorm finite", std::isfinite(lip)},
      {"T-E constant known", true},
  };
  cert.value = std::exp(mu_r + 2.0 * p * c * lip * lip / ((p - 2.0) * 2.0));
  cert.is_tail_probability = false;
  detail::finalize(cert);
  return cert;
}

/**
 * Feynman-Kac Chernoff tail bound: with ||P||_{2->p} = hyper_norm supplied,
 *
 *   P_beta( (1/N) sum r(x_i) - mu_pi(r) >= eps )
 *     <= ||d beta/d mu||_2 exp( N ( ln hyper_norm
 *            + inf_{s>0} [ (2p/(p-2)) s^2 C ||r||_L^2 / 2 - s eps ] ) ).
 *
 * The infimum is taken in closed form, s* = eps (p-2) / (2 p C ||r||_L^2),
 * giving per-step exponent ln hyper_norm - eps^2 (p-2)/(4 p C ||r||_L^2),
 * and revalidated by golden-section search; disagreement beyond 1e-10
 * aborts (it would mean the exponent algebra was transcribed wrong).
 */
inline ConcentrationCertificate chernoff_fk_bound(
    const StationaryMeasure& mu, const Observable& r,
    const InitialDistribution& beta, double p, double hyper_norm,
    std::int64_t n_steps, double epsilon,
    std::optional<double> c_override = std::nullopt) {
  if (!(p > 2.0)) throw InvalidExponent("chernoff_fk_bound: p must be > 2");
  if (!(hyper_norm > 0.0)) {
    throw InvalidParameter("chernoff_fk_bound: hyper_norm must be > 0");
  }
  if (n_steps < 0) throw InvalidParameter("chernoff_fk_bound: N < 0");
  if (!(epsilon >= 0.0)) {
    throw InvalidParameter("chernoff_fk_bound: epsilon must be >= 0");
  }
  const double c = c_override ? *c_override : effective_te_constant(mu);
  const double lip = r.lipschitz_seminorm;
  const double ratio = density_ratio_l2(beta, mu);  // DivergentRatio escapes
  const double curvature = p * c * lip * lip / (p - 2.0);  // a in a s^2 - eps s

  double s_star, inf_exponent;
  if (curvature > 0.0) {
    s_star = epsilon * (p - 2.0) / (2.0 * p * c * lip * lip);
    inf_exponent = -epsilon * epsilon * (p - 2.0) / (4.0 * p * c * lip * lip);
    const auto objective = [&](double s) {
      return curvature * s * s - s * epsilon;
    };
    const double hi = 2.0 * s_star + 1.0;
    const double s_search =
        detail::golden_section_min(objective, 0.0, hi, 1e-13 * hi);
    const double inf_search = objective(s_search);
    if (std::abs(inf_search - inf_exponent) >
        1e-10 * std::max(1.0, std::abs(inf_exponent))) {
      throw Error(
          "chernoff_fk_bound: closed-form s-infimum disagrees with "
          "golden-section search beyond 1e-10");
    }
  } else {
    // Constant observable: the exponent decreases without bound for any
    // positive deviation level.
    s_star = epsilon > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    inf_exponent =
        epsilon > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
  }
  const double per_step = std::log(hyper_norm) + inf_exponent;

  ConcentrationCertificate cert;
  cert.theorem = Theorem::ChernoffFK;
  cert.inputs = {{"p", p},
                 {"c_pi", c},
                 {"lipschitz", lip},
                 {"density_ratio", ratio},
                 {"hyper_norm", hyper_norm},
                 {"N", static_cast<double>(n_steps)},
                 {"epsilon", epsilon},
                 {"s_star", s_star},
                 {"exponent_per_step", per_step}};
  cert.precondition_report = {
      {"p > 2", p > 2.0},
      {"epsilon >= 0", epsilon >= 0.0},
      {"hyper_norm supplied (> 0)", hyper_norm > 0.0},
      {"density ratio finite", std::isfinite(ratio)},
  };
  cert.value = ratio * std::exp(static_cast<double>(n_steps) * per_step);
  cert.is_tail_probability = true;
  detail::finalize(cert);
  return cert;
}

/**
 * Minimal sample size under hyperboundedness, no reversibility assumed.
 * Requires the norm condition ||P||_{2->q} < e^{(1/2)(1/2 - 1/q)} and a
 * positive denominator (q-2) - 4 n^2 q ln||P||; then
 *
 *   N = ln( ||d beta/d mu||_2 / (1-delta) )
 *         * 4 n^2 q / ( (q-2) - 4 n^2 q ln||P|| )
 *
 * guarantees P_beta( deviation >= sqrt(C) ||r||_L / n ) < 1 - delta
 * (the inequality is implemented verbatim as stated).
 */
inline ConcentrationCertificate sample_complexity_thm10(
    const StationaryMeasure& mu, const Observable& r,
    const InitialDistribution& beta, double q, double hyper_norm,
    std::int64_t n, double delta,
    std::optional<double> c_override = std::nullopt) {
  if (!(q > 2.0)) {
    throw InvalidExponent("sample_complexity_thm10: q must be > 2");
  }
  if (n < 1) throw InvalidParameter("sample_complexity_thm10: n < 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidParameter("sample_complexity_thm10: delta outside (0,1)");
  }
  if (!(hyper_norm > 0.0)) {
    throw InvalidParameter("sample_complexity_thm10: hyper_norm must be > 0");
  }
  const double norm_cap = std::exp(0.5 * (0.5 - 1.0 / q));
  if (!(hyper_norm < norm_cap)) {
    throw NormConditionViolated(
        "sample_complexity_thm10: ||P||_{2->q} = " +
        std::to_string(hyper_norm) + " not below e^{(1/2)(1/2-1/q)} = " +
        std::to_string(norm_cap));
  }
  const double nn = static_cast<double>(n);
  const double denominator = (q - 2.0) - 4.0 * nn * nn * q * std::log(hyper_norm);
  if (!(denominator > 0.0)) {
    throw NegativeDenominator(
        "sample_complexity_thm10: (q-2) - 4 n^2 q ln||P|| = " +
        std::to_string(denominator) + " is not positive");
  }
  const double c = c_override ? *c_override : effective_te_constant(mu);
  const double lip = r.lipschitz_seminorm;
  const double ratio = density_ratio_l2(beta, mu);
  const double epsilon_n = std::sqrt(c) * lip / nn;

  ConcentrationCertificate cert;
  cert.theorem = Theorem::HyperboundedSampleComplexity;
  cert.inputs = {{"q", q},
                 {"c_pi", c},
                 {"lipschitz", lip},
                 {"density_ratio", ratio},
                 {"hyper_norm", hyper_norm},
                 {"n", nn},
                 {"delta", delta},
                 {"epsilon_n", epsilon_n},
                 {"norm_condition_rhs", norm_cap},
                 {"denominator", denominator}};
  cert.precondition_report = {
      {"q > 2", q > 2.0},
      {"norm condition ||P|| < e^{(1/2)(1/2-1/q)}", hyper_norm < norm_cap},
      {"denominator positive", denominator > 0.0},
      {"density ratio finite", std::isfinite(ratio)},
  };
  cert.value = std::log(ratio / (1.0 - delta)) * 4.0 * nn * nn * q / denominator;
  cert.is_tail_probability = false;
  detail::finalize(cert);
  return cert;
}

/**
 * Hypercontractive tail bound (||P||_{2->p} <= 1 assumed):
 *
 *   P_beta( deviation >= eps )
 *     <= ||d beta/d mu||_2 exp( -N eps^2 (p-2) / (4 C ||r||_L^2 p) ).
 *
 * When delta is given, the companion minimal sample size
 * ln(||d beta/d mu||_2/(1-delta)) 4 C ||r||_L^2 p / (eps^2 (p-2)) is
 * reported as inputs["min_N"].
 */
inline ConcentrationCertificate hypercontractive_tail_cor11(
    const StationaryMeasure& mu, const Observable& r,
    const InitialDistribution& beta, double p, std::int64_t n_steps,
    double epsilon, std::optional<double> delta = std::nullopt,
    std::optional<double> c_override = std::nullopt) {
  if (!(p > 2.0)) {
    throw InvalidExponent("hypercontractive_tail_cor11: p must be > 2");
  }
  if (n_steps < 0) throw InvalidParameter("hypercontractive_tail_cor11: N < 0");
  if (!(epsilon >= 0.0)) {
    throw InvalidParameter("hypercontractive_tail_cor11: epsilon < 0");
  }
  const double c = c_override ? *c_override : effective_te_constant(mu);
  const double lip = r.lipschitz_seminorm;
  const double ratio = density_ratio_l2(beta, mu);
  const double lip_sq_c = c * lip * lip;
  double exponent;
  if (lip_sq_c > 0.0) {
    exponent = -static_cast<double>(n_steps) * epsilon * epsilon * (p - 2.0) /
               (4.0 * lip_sq_c * p);
  } else {
    exponent = epsilon > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
  }

  ConcentrationCertificate cert;
  cert.theorem = Theorem::HypercontractiveTail;
  cert.inputs = {{"p", p},
                 {"c_pi", c},
                 {"lipschitz", lip},
                 {"density_ratio", ratio},
                 {"N", static_cast<double>(n_steps)},
                 {"epsilon", epsilon}};
  cert.precondition_report = {
      {"p > 2", p > 2.0},
      {"epsilon >= 0", epsilon >= 0.0},
      {"density ratio finite", std::isfinite(ratio)},
  };
  if (delta) {
    if (!(*delta > 0.0 && *delta < 1.0)) {
      throw InvalidParameter("hypercontractive_tail_cor11: delta outside (0,1)");
    }
    cert.inputs["delta"] = *delta;
    cert.inputs["min_N"] =
        lip_sq_c > 0.0 && epsilon > 0.0
            ? std::log(ratio / (1.0 - *delta)) * 4.0 * lip_sq_c * p /
                  (epsilon * epsilon * (p - 2.0))
            : 0.0;
  }
  cert.value = ratio * std::exp(exponent);
  cert.is_tail_probability = true;
  detail::finalize(cert);
  return cert;
}

/// Right edge of the validity region of the Gaussian norm bound:
/// p < 1 + 1/alpha^2 (infinite for alpha = 0).
inline double gaussian_hyperbound_boundary(double alpha) {
  if (!(std::abs(alpha) < 1.0)) {
    throw InvalidParameter("gaussian_hyperbound_boundary: |alpha| >= 1");
  }
  if (alpha == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 + 1.0 / (alpha * alpha);
}

/**
 * Closed-form norm bound for the linear-Gaussian chain, implemented
 * verbatim:
 *
 *   ||P||_{2->p} <= (1-alpha^4)^{-1/4} (1 - alpha^2 p/(1+alpha^2))^{-1/(2p)}
 *                   * exp( -(2/p) (1 - alpha^2 p/(1+alpha^2)) ),
 *
 * valid for p < 1 + 1/alpha^2. The certificate flags hypercontractivity
 * when the value is <= 1. Note ||P||_{2->p} >= ||P 1||_p = 1 always, so a
 * value below 1 cannot be sharp; the hyperbound probe is the cross-check.
 */
inline ConcentrationCertificate gaussian_hyperbound(double alpha, double p) {
  if (!(std::abs(alpha) < 1.0)) {
    throw InvalidParameter("gaussian_hyperbound: requires |alpha| < 1");
  }
  if (!(p > 2.0)) throw InvalidExponent("gaussian_hyperbound: p must be > 2");
  const double boundary = gaussian_hyperbound_boundary(alpha);
  if (!(p < boundary)) {
    throw OutsideValidityRegion(
        "gaussian_hyperbound: p = " + std::to_string(p) +
        " outside (2, " + std::to_string(boundary) + ")");
  }
  const double a2 = alpha * alpha;
  const double slack = 1.0 - a2 * p / (1.0 + a2);
  const double value = std::pow(1.0 - a2 * a2, -0.25) *
                       std::pow(slack, -1.0 / (2.0 * p)) *
                       std::exp(-(2.0 / p) * slack);
  ConcentrationCertificate cert;
  cert.theorem = Theorem::GaussianHyperbound;
  cert.inputs = {{"alpha", alpha},
                 {"p", p},
                 {"validity_boundary", boundary},
                 {"hypercontractive", value <= 1.0 ? 1.0 : 0.0}};
  cert.precondition_report = {
      {"|alpha| < 1", std::abs(alpha) < 1.0},
      {"p > 2", p > 2.0},
      {"p < 1 + 1/alpha^2", p < boundary},
  };
  cert.value = value;
  cert.is_tail_probability = false;
  detail::finalize(cert);
  return cert;
}

/// Largest p the closed-form bound can certify as hypercontractive.
inline constexpr double kHypercontractivePMax = 64.0;

/**
 * Bisection for the largest p in (2, 1 + 1/alpha^2) with
 * gaussian_hyperbound(alpha, p) <= 1, to 1e-9 in p and capped at p = 64
 * (the alpha = 0 region is unbounded). nullopt when no p qualifies.
 */
inline std::optional<double> find_hypercontractive_p(double alpha) {
  if (!(std::abs(alpha) < 1.0)) {
    throw InvalidParameter("find_hypercontractive_p: requires |alpha| < 1");
  }
  const double boundary = gaussian_hyperbound_boundary(alpha);
  const double hi_cap =
      std::isfinite(boundary)
          ? std::min(kHypercontractivePMax, 2.0 + (boundary - 2.0) * (1.0 - 1e-9))
          : kHypercontractivePMax;
  auto bound_at = [&](double p) { return gaussian_hyperbound(alpha, p).value; };
  if (bound_at(hi_cap) <= 1.0) return hi_cap;
  // Scan from the right for the last sub-unit grid point, then bisect the
  // crossing. The bound blows up at the right edge of the region, so the
  // largest admissible p sits at a crossing of 1.
  constexpr int kGrid = 512;
  double below = std::numeric_limits<double>::quiet_NaN();
  double above = hi_cap;
  for (int i = kGrid - 1; i >= 1; --i) {
    const double p = 2.0 + (hi_cap - 2.0) * static_cast<double>(i) / kGrid;
    if (bound_at(p) <= 1.0) {
      below = p;
      break;
    }
    above = p;
  }
  if (!std::isfinite(below)) return std::nullopt;
  while (above - below > 1e-9) {
    const double mid = 0.5 * (below + above);
    if (bound_at(mid) <= 1.0) {
      below = mid;
    } else {
      above = mid;
    }
  }
  return below;
}

/**
 * The norm value downstream consumers should feed into Chernoff-type
 * certificates at exponent p: the verbatim closed-form value, floored at
 * 1. The floor is exact mathematics, not a fudge: P1 = 1 forces
 * ||P||_{2->p} >= 1, so a sub-unit closed-form value would make the
 * Feynman-Kac exponent unsoundly negative.
 */
inline double certified_hyper_norm(double alpha, double p) {
  return std::max(1.0, gaussian_hyperbound(alpha, p).value);
}

}  // namespace markovcert
