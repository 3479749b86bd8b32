#pragma once

#include <stdexcept>
#include <string>

namespace gpfractal {

/// Argument outside the mathematical domain of an operation (r > x_max, v > γ(x_max), ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to certify its result (PSD failure, quadrature divergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration or user input. Carries the offending field path.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace gpfractal
