#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rauq {

// Base for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input line (bad JSON, bad CSV row). Carries the 1-based line.
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A record violates a data-model invariant. `field` names the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, std::string detail, std::size_t line = 0)
      : Error(compose(field, detail, line)), field_(std::move(field)), detail_(std::move(detail)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& detail() const noexcept { return detail_; }
  std::size_t line() const noexcept { return line_; }

  ValidationError at_line(std::size_t line) const { return ValidationError(field_, detail_, line); }

 private:
  static std::string compose(const std::string& field, const std::string& what, std::size_t line) {
    std::string msg;
    if (line != 0) msg += "line " + std::to_string(line) + ": ";
    return msg + "invalid \"" + field + "\": " + what;
  }

  std::string field_;
  std::string detail_;
  std::size_t line_;
};

class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Well-formed trace whose contents cannot feed the requested computation.
class DataError : public Error {
 public:
  using Error::Error;
};

// Caller broke an operation precondition (empty input, single class, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rauq
