#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xeval {

// Malformed or inconsistent input data (bad files, dangling ids, syntax errors).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parse failure with a 1-based source position. column is 0 when unknown.
class ParseError : public DataError {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column = 0);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Caller-side misuse: bad arguments, missing files, invalid configuration.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Optimisation produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace xeval
