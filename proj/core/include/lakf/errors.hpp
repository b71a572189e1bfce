#pragma once

#include <stdexcept>
#include <string>

namespace lakf {

/// Invalid argument or violated precondition (bad box, shape mismatch, ...).
class DomainError : public std::invalid_argument {
public:
  DomainError(const std::string& module, const std::string& what)
      : std::invalid_argument(module + ": " + what) {}
};

/// Numerical failure at runtime (non-finite values, singular matrix, ...).
class NumericError : public std::runtime_error {
public:
  NumericError(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what) {}
};

/// Malformed or mismatched file content (schema, version, field errors).
class FormatError : public std::runtime_error {
public:
  FormatError(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what) {}
};

/// Text input that failed to parse; carries a 1-based line number.
class ParseError : public FormatError {
public:
  ParseError(const std::string& module, std::size_t line, const std::string& what)
      : FormatError(module, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

}  // namespace lakf
