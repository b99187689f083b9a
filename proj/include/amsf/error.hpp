#pragma once

#include <stdexcept>
#include <string>

namespace amsf {

// Base of every error raised by the library. The subclasses map onto the
// CLI exit codes (config = 1, io = 2, numeric = 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed embedding file contents ("not an embedding file", "corrupt
// record", "invalid value").
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Shape / argument contract violations.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace amsf
