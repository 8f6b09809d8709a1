#pragma once

#include <stdexcept>
#include <string>

namespace wde {

/// Raised for invalid inputs and failed numerical preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed scenarios and command-line arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wde
