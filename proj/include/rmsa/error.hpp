#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rmsa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input parsed but violates a structural rule (duplicate link, disconnected graph, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an operation's precondition. Indicates a bug in the agent or harness.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Bad run configuration; carries the offending field name.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace rmsa
