#pragma once

#include <stdexcept>
#include <string>

namespace deal {

// Malformed user input (CSV, sidecar, config). The CLI maps it to exit code 2.
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A selection was requested from an exhausted pool.
class empty_pool_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace deal
