#pragma once

#include <stdexcept>
#include <string>

namespace ckt {

// Bad input: shape mismatch, violated precondition, unsupported dimension.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Integer overflow in a dimension count.
class OverflowError : public ValidationError {
 public:
  explicit OverflowError(const std::string& what) : ValidationError(what) {}
};

// An iterative or spectral routine did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ckt
