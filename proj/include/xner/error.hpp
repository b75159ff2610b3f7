#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xner {

/// Base class for all library errors. `exit_code()` maps onto the CLI contract:
/// 1 usage/config, 2 data error, 3 numerical failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 2; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 1; }
};

class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; the message carries `<path>:<line>: ...`.
class ParseError : public DataError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

}  // namespace xner
