#pragma once

#include <stdexcept>
#include <string>

namespace mfs {

// Raised for malformed or inconsistent configuration input (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised for numerical failures at run time (CLI exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mfs
