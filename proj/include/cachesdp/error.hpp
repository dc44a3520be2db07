#pragma once

#include <stdexcept>
#include <string>

namespace cachesdp {

// Bad user input or a config that violates a model invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Height/cutoff combinations that leave a path-loss model without a valid segment layout.
class GeometryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Argument outside the domain of a special function or closed form.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A quadrature or iteration that did not reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double value, double abs_error, int evaluations)
      : std::runtime_error(what + " (value=" + std::to_string(value) +
                           ", abs_error=" + std::to_string(abs_error) +
                           ", evals=" + std::to_string(evaluations) + ")"),
        value_(value),
        abs_error_(abs_error),
        evaluations_(evaluations) {}

  double value() const noexcept { return value_; }
  double abs_error() const noexcept { return abs_error_; }
  int evaluations() const noexcept { return evaluations_; }

 private:
  double value_;
  double abs_error_;
  int evaluations_;
};

}  // namespace cachesdp
