#pragma once

#include <stdexcept>
#include <string>

namespace zerosum {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed something that violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// An exhaustive computation would exceed its configured node budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Internal numerical failure (e.g. the simplex did not terminate).
class SolverFailure : public Error {
 public:
  using Error::Error;
};

// Malformed checkpoint or config input.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace zerosum
