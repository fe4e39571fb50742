#pragma once

#include <stdexcept>
#include <string>

namespace markovcert {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration (bad field, unknown key, broken range).
/// The CLI maps this to exit code 1 and the message names the field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A domain-type invariant was violated at construction (e.g. |alpha| >= 1).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Operation requires a closed-form stationary measure the chain lacks.
class UnsupportedChain : public Error {
 public:
  using Error::Error;
};

/// The L2 density-ratio integral of an initial distribution diverges;
/// any certificate depending on it is vacuous for that initial law.
class DivergentRatio : public Error {
 public:
  using Error::Error;
};

class EmptyTrajectory : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

/// Empirical exponential moment left the representable range
/// (lambda too large for the sample size).
class MomentOverflow : public Error {
 public:
  using Error::Error;
};

/// Quadrature self-test failed (basis orthonormality beyond tolerance).
class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

/// Dense eigensolve did not converge; discretization is ill-conditioned.
class EigensolveFailure : public Error {
 public:
  using Error::Error;
};

/// An Ulam cell carries no resolvable probability mass.
class EmptyCell : public Error {
 public:
  using Error::Error;
};

/// Integrability exponent outside (2, inf).
class InvalidExponent : public Error {
 public:
  using Error::Error;
};

class UnknownTEConstant : public Error {
 public:
  using Error::Error;
};

/// Hyperbounded-norm condition of the sample-complexity theorem fails.
class NormConditionViolated : public Error {
 public:
  using Error::Error;
};

/// Sample-complexity denominator (q-2) - 4 n^2 q ln||P|| is not positive.
class NegativeDenominator : public Error {
 public:
  using Error::Error;
};

/// (alpha, p) pair outside the validity region of the Gaussian norm bound.
class OutsideValidityRegion : public Error {
 public:
  using Error::Error;
};

}  // namespace markovcert
