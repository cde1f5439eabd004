#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (sizes, ranges, empty input).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A point fell outside the domain of a function, e.g. a spline evaluated off [0,1].
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A column named by a schema is missing or a schema string is malformed.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A data cell could not be parsed as a finite number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : Error(what), row_(row) {}

  /// Zero-based data row (header excluded).
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// The requested combination of options cannot be run on the given data.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnsupportedConfiguration : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class SingularCovariance : public Error {
 public:
  using Error::Error;
};

/// Unknown name in a catalog lookup (scenarios, methods, bench suites).
class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcm
