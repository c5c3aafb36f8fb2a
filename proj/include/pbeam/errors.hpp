#pragma once
#include <stdexcept>
#include <string>

namespace pbeam {

// Bad user input: config files, CLI values, invalid brackets. Exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Hard numerical failure: dt underflow, Newton breakdown, non-finite state
// outside a recoverable step attempt. Exit code 2. (A trajectory hitting the
// blow-up guard is NOT an error; it is reported as "diverged".)
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace pbeam
