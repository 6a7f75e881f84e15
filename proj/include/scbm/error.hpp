#pragma once

#include <stdexcept>
#include <string>

namespace scbm {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Ax = b has no solution; carries the relative residual of the least-squares fit.
class InconsistentSystem : public Error {
 public:
  InconsistentSystem(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A cross-block construction produced an invalid edge probability.
class InfeasibleConstruction : public Error {
 public:
  using Error::Error;
};

/// A sampler could not place the requested edges within its budget.
class GenerationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace scbm
