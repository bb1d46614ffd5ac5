#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cuescore {

/// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened at all.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed container (bad RIFF layout, missing chunk).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Well-formed file that uses something we do not accept (channels, rate, codec).
class UnsupportedFormatError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// MTX1 parse failures. The kind lets callers tell them apart without string matching.
class ParseError : public FormatError {
 public:
  enum class Kind { kBadMagic, kTruncated, kNonFinite, kBadHeader, kBadField };

  ParseError(Kind kind, const std::string& what) : FormatError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Content-level validation failure; line is 1-based, 0 when not tied to a line.
class ValidationError : public Error {
 public:
  ValidationError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InventoryError : public Error {
 public:
  using Error::Error;
};

class TooShortError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace cuescore
