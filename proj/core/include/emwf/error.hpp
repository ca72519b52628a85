#pragma once

#include <stdexcept>
#include <string>

namespace emwf {

// Precondition violations on arguments (bad grid sizes, mismatched grids, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A state that cannot be normalized or is not normalized where it must be.
class DegenerateState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Density reaches the periodic boundary; moments of a wrapped state are meaningless.
class BoundaryLeak : public std::runtime_error {
 public:
  BoundaryLeak(const std::string& what, double boundary_density)
      : std::runtime_error(what), boundary_density_(boundary_density) {}
  double boundary_density() const noexcept { return boundary_density_; }

 private:
  double boundary_density_;
};

// Non-finite values produced by a numerical kernel.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace emwf
