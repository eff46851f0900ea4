#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace forch {

/// Base of every error raised by the core library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (negative s, nonpositive weight, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A scenario, law or configuration failed validation. `field()` names the offending entry.
class ValidationError : public Error {
public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// An iterative method failed. Carries the residual history for diagnostics.
class NumericError : public Error {
public:
  NumericError(const std::string& what, std::vector<double> residuals = {})
      : Error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const noexcept { return residuals_; }

private:
  std::vector<double> residuals_;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace forch
