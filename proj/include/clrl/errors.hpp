#pragma once

#include <stdexcept>
#include <string>

namespace clrl {

// Raised when an input violates a documented precondition (bad probability
// vector, malformed config, shape mismatch, ...).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when a computation fails at runtime despite valid inputs
// (unwritable output, I/O failure, numeric breakdown).
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace clrl
