#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dsuedhi {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates a model invariant (dangling node, bad
/// physical parameter, unreachable OD pair, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Failure while evaluating the model (storage overflow, demand overdraw).
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsuedhi
