#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace derail {

/// Base class for every error raised by the library. `kind()` is a short
/// machine-readable tag surfaced in the CLI's structured error output.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error("parse_error", source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error("validation_error", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io_error", what) {}
};

class MissingFeatureError : public Error {
 public:
  explicit MissingFeatureError(const std::string& what) : Error("missing_feature", what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("dimension_mismatch", what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error("numeric_error", what) {}
};

class FormatVersionError : public Error {
 public:
  explicit FormatVersionError(const std::string& what) : Error("format_version", what) {}
};

}  // namespace derail
