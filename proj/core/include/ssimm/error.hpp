#pragma once

#include <stdexcept>
#include <string>

namespace ssimm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its documented domain (q = 0, k >= n, negative strength, ...).
class InvalidParameter : public Error {
public:
  using Error::Error;
};

/// Input data violates a structural requirement (asymmetric gram, size mismatch, ...).
class InvalidInput : public Error {
public:
  using Error::Error;
};

/// A documented precondition on values was violated (e.g. non-zero-mean block).
class PreconditionViolation : public Error {
public:
  using Error::Error;
};

/// Linear algebra failure (singular system, eigensolver failure).
class NumericalError : public Error {
public:
  using Error::Error;
};

/// An iterative solver produced a non-finite value.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string& what, int iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

private:
  int iteration_;
};

/// Distortion calibration could not reach the requested MSE.
class CalibrationFailure : public Error {
public:
  CalibrationFailure(const std::string& what, double achievable_max)
      : Error(what), achievable_max_(achievable_max) {}

  double achievable_max() const noexcept { return achievable_max_; }

private:
  double achievable_max_;
};

/// File could not be read, written or parsed.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace ssimm
