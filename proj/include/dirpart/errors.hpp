#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dirpart {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatch, negative radius, empty sets.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A configuration that cannot be run (degenerate domain, bad JSON config).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to reach its tolerance.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double achieved = 0.0)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Eigen-iteration ran out of iterations. Carries the best iterate.
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double residual, double best_value,
                   std::vector<double> best_vector)
      : NumericError(what, residual),
        best_value_(best_value),
        best_vector_(std::move(best_vector)) {}

  double best_value() const noexcept { return best_value_; }
  const std::vector<double>& best_vector() const noexcept { return best_vector_; }

 private:
  double best_value_;
  std::vector<double> best_vector_;
};

/// An internal invariant was violated (overlapping supports and the like).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace dirpart
