#pragma once

#include <stdexcept>
#include <string>

namespace otlab {

/// Base class for all library errors. `code()` is a short machine-readable
/// tag ("negative_weight", "dimension_mismatch", ...) used by the CLI to
/// emit structured error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Invalid inputs or violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File or serialization problems.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An enumeration or size guard tripped; the instance is too large for the
/// requested exhaustive computation.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a broken internal numeric certificate.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Candidate dual potentials violate h(x) + k(y) <= c(x,y).
class DualInfeasible : public ValidationError {
 public:
  explicit DualInfeasible(const std::string& message)
      : ValidationError("dual_infeasible", message) {}
};

}  // namespace otlab
