#pragma once

#include <stdexcept>
#include <string>

namespace gms {

// Input violates a documented precondition (bad mass/moment, overlapping
// partition, out-of-range argument).  CLI maps this to exit code 2.
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// A numeric procedure failed to reach its tolerance (no sign change in a
// bracketing solve, quadrature stagnation).  CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed serialized data or an object breaking a structural invariant.
// CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gms
