#pragma once

#include <stdexcept>
#include <string>

namespace spsa {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// s coincides with an eigenvalue of A; the resolvent (sI - A)^-1 does not exist.
class SingularResolvent : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested at (or too close to) the branch point s = -omega_h.
class BranchPoint : public Error {
 public:
  using Error::Error;
};

/// Inconsistent matrix/vector dimensions.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Invalid domain values (non-positive time constants, non-increasing grids, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Requested analysis regime is not representable (tau_r = inf with dynamics).
class UnsupportedRegime : public Error {
 public:
  using Error::Error;
};

/// LTV grid spacing too large for the finite-difference scheme.
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

/// Storage cannot supply the demanded power: P_e > E_s / (2 tau_r).
class ChokeError : public Error {
 public:
  ChokeError(const std::string& msg, double t, double es, double pe)
      : Error(msg), time(t), energy(es), power(pe) {}
  double time;
  double energy;
  double power;
};

/// Fixed-step integrator local error estimate exceeded its bound.
class StepTooLarge : public Error {
 public:
  using Error::Error;
};

/// No lead-lag parameters attain the requested peak-phase/gain specs.
class SpecUnachievable : public Error {
 public:
  using Error::Error;
};

/// Shifted transfer function is not analytic in the closed right half-plane.
class AnalyticityViolation : public Error {
 public:
  using Error::Error;
};

/// Sufficiency and necessity disagreed where theory says they coincide.
class EquivalenceViolation : public Error {
 public:
  using Error::Error;
};

/// Schema violation while parsing an input file. `pointer` is a JSON-pointer
/// (or CSV position) naming the offending field.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& msg, std::string ptr)
      : Error(msg + " (at " + ptr + ")"), pointer(std::move(ptr)) {}
  std::string pointer;
};

}  // namespace spsa
