#pragma once

#include <stdexcept>
#include <string>

namespace grom {

/// Bad input: malformed files, shape mismatches, violated preconditions.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation that could not complete: non-convergence, loss of positive
/// definiteness, non-finite state.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace grom
