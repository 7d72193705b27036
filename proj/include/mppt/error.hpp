#pragma once

#include <stdexcept>
#include <string>

namespace mppt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a documented precondition or type invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Band-gap formula evaluated at its pole (T = 1108 K).
class SingularTemperatureError : public Error {
 public:
  using Error::Error;
};

/// An exponent left the representable range of double.
class NumericRangeError : public Error {
 public:
  using Error::Error;
};

/// Datasheet slope at open circuit is too shallow for a non-negative R_S.
class InconsistentDatasheetError : public Error {
 public:
  using Error::Error;
};

/// The implicit cell equation could not be solved.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, int iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Two consecutive samples carry no slope information and there is no history to fall back on.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

/// Scenario/profile file problems. The message carries file and line when known.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mppt
