#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace propsearch {

// Every failure surfaced by the library carries a short machine-parseable
// class name (e.g. "format_error") that the CLI prints verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Malformed text or binary input. `line` is 1-based, 0 when not applicable.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message, std::size_t line = 0)
      : Error("format_error", line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyModelError : public Error {
 public:
  explicit EmptyModelError(const std::string& message) : Error("empty_model", message) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message) : Error("dimension_error", message) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t record)
      : Error("parse_error", "record " + std::to_string(record) + ": " + message),
        record_(record) {}

  std::size_t record() const noexcept { return record_; }

 private:
  std::size_t record_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation_error", message) {}
};

class BuildError : public Error {
 public:
  explicit BuildError(const std::string& message) : Error("build_error", message) {}
};

// Truncated or inconsistent binary index stream.
class CorruptionError : public Error {
 public:
  CorruptionError(const std::string& message, std::size_t offset)
      : Error("corruption_error", message + " at byte offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ScopeError : public Error {
 public:
  explicit ScopeError(const std::string& message) : Error("scope_error", message) {}
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& message) : Error("argument_error", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

}  // namespace propsearch
