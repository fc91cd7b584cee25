#pragma once

#include <stdexcept>
#include <string>

namespace isoflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid model or run parameters (dimension, field, tau, step sizes, ...).
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Entries of an evolution matrix left the representable range.
class NumericalOverflowError : public Error {
public:
  using Error::Error;
};

/// QR renormalization met a vanishing triangular diagonal.
class DegenerateTrajectoryError : public Error {
public:
  using Error::Error;
};

/// Evaluation at coincident exponents where a coth/sinh factor is singular.
class SingularityError : public Error {
public:
  using Error::Error;
};

/// A linear system (Gram matrix) is too ill-conditioned to invert reliably.
class ConditioningError : public Error {
public:
  using Error::Error;
};

/// Malformed experiment configuration. `field()` names the offending key.
class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// A step failure annotated with the trajectory and step at which it occurred.
class TrajectoryError : public Error {
public:
  TrajectoryError(long trajectory_id, long step, const std::string& what)
      : Error("trajectory " + std::to_string(trajectory_id) + ", step " +
              std::to_string(step) + ": " + what),
        trajectory_id_(trajectory_id), step_(step) {}
  long trajectory_id() const noexcept { return trajectory_id_; }
  long step() const noexcept { return step_; }

private:
  long trajectory_id_;
  long step_;
};

} // namespace isoflow
