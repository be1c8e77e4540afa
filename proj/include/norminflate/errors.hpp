#pragma once

#include <stdexcept>
#include <string>

namespace norminflate {

// std::invalid_argument is used directly for bad scalar arguments
// (negative heat time, non-positive integration time, ...).

/// Construction or bound parameters violate a documented constraint.
class parameter_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A field does not fit on the requested spectral grid.
class resolution_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation's mathematical precondition fails (e.g. Besov norm of a field with a mean).
class precondition_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The time integrator detected a CFL violation or a non-finite value.
class simulation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace norminflate
