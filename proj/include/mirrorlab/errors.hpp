#pragma once

#include <stdexcept>
#include <string>

namespace mirrorlab {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters violate a structural constraint (bad N, bad fraction, ...).
class ConstraintError : public Error {
 public:
  using Error::Error;
};

// A queue or simulation is not stable (rho >= 1, runaway queue).
class InstabilityError : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration would exceed the configured budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Operation not defined for this layout kind.
class UnsupportedLayout : public Error {
 public:
  using Error::Error;
};

// Linear system without a unique solution, or absorption unreachable.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

// Input document failed to validate. `path` names the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace mirrorlab
