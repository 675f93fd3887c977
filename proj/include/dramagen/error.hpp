#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dramagen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unusable XML input. `byte_offset` points into the input.
class XmlParseError : public Error {
 public:
  XmlParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (at byte " + std::to_string(byte_offset) + ")"), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

/// Structural error in the tagged corpus format.
class TaggedFormatError : public Error {
 public:
  TaggedFormatError(const std::string& what, std::string tag, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what + " [" + tag + "]"),
        tag_(std::move(tag)),
        line_(line) {}
  const std::string& tag() const noexcept { return tag_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string tag_;
  std::size_t line_;
};

class AlignmentError : public Error {
 public:
  AlignmentError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Request would not fit the model context. Always a caller bug.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Transport-level failure after all retry attempts.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int attempts)
      : Error(what + " (after " + std::to_string(attempts) + " attempts)"), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

/// The backend rejected a request (non-retryable).
class BackendError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for the given input.
class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace dramagen
