#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace opph {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed external data.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TruncationError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ParseError : public FormatError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : FormatError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Pearson r is undefined when either series has zero variance.
class DegenerateCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace opph
