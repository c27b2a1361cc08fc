#pragma once

#include <stdexcept>
#include <string>

namespace weave {

/// Base exception for recoverable failures raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for malformed configuration values; maps to CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace weave
