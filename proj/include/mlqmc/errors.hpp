#pragma once

#include <stdexcept>
#include <string>

namespace mlqmc {

// Bad arguments, malformed files or configs. The CLI maps this to exit code 2.
struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Instance exceeds a configured resource limit. The CLI maps this to exit code 3.
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mlqmc
