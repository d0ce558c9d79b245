#pragma once
#include <stdexcept>
#include <string>

namespace landau {

// Invalid physical or numerical input (CLI exit code 3).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Iterative method ran out of budget (CLI exit code 4).
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A lattice sum whose tail could not be certified below the requested tolerance.
struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computed object failed one of its own consistency checks.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace landau
