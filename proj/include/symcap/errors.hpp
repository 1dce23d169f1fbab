#pragma once

#include <stdexcept>
#include <string>

namespace symcap {

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when a (d, k) pair would produce more orbits or entries than the
// configured cap allows.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPsdError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The program has no feasible point, e.g. a divergence whose first argument
// is not supported inside the second.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace symcap
