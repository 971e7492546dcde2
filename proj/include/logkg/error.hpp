#pragma once

#include <stdexcept>
#include <string>

namespace logkg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the admissible domain (bad parameters, grids, files).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Dilation cannot reach the constraint K = 0 (no positive root).
class NotProjectable : public Error {
 public:
  using Error::Error;
};

/// Shooting bracket does not straddle the ground-state amplitude.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// Iterative method exhausted its budget before meeting tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Numerical integrator or nonlinear solve broke down.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace logkg
