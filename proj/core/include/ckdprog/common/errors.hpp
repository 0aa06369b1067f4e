#pragma once

#include <stdexcept>
#include <string>

namespace ckdprog {

// Input failed a precondition or schema check. The CLI maps this to exit 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Timeline carries no staged CKD code, so no progression label exists.
class NotStageableError : public ValidationError {
 public:
  explicit NotStageableError(const std::string& what) : ValidationError(what) {}
};

// Problem size exceeds a hard enumeration limit.
class CapacityError : public ValidationError {
 public:
  explicit CapacityError(const std::string& what) : ValidationError(what) {}
};

// An iterative solver failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double gradient_norm, int iterations)
      : std::runtime_error(what), gradient_norm(gradient_norm), iterations(iterations) {}

  double gradient_norm;
  int iterations;
};

}  // namespace ckdprog
