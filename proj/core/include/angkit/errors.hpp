#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace angkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed skeleton capture text. Carries the 1-based line where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Binary container problems: bad magic, truncation, zero dims, version mismatch.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Incompatible tensor shapes or out-of-range indices.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid schema, model or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during training (NaN gradients, diverging loss).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace angkit
