#pragma once

#include <stdexcept>
#include <string>

namespace drugmcts {

/// Base of every exception the engine throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed record in one of the JSONL inputs. `line` is 1-based, 0 when not tied to a line.
class SchemaError : public Error {
 public:
  SchemaError(std::string file, std::size_t line, const std::string& what)
      : Error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Cross-reference problems: dangling ids, dimension mismatches, misaligned inputs.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Raised by similarity kernels when their preconditions do not hold.
class MetricError : public Error {
 public:
  using Error::Error;
};

/// Transport failure, malformed server response, exhausted fixture.
class BackendError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

}  // namespace drugmcts
