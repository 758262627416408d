#pragma once

#include <stdexcept>
#include <string>

namespace ppw {

/// Raised when an argument violates an operation's precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an ensemble variant does not support the requested operation.
class UnsupportedVariant : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when a numerical routine fails (non-convergence, envelope violation).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

}  // namespace ppw
