#pragma once

#include <stdexcept>
#include <string>

namespace semo {

/// Violated precondition: mismatched shapes, out-of-range indices, bad arguments.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A file could not be opened or decoded.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary payload does not follow its declared layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Payload ended before the declared length.
class LengthError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Non-finite values reached the optimizer or the loss.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace semo
