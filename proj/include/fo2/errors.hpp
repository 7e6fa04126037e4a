#pragma once

#include <stdexcept>
#include <string>

namespace fo2 {

// Base for every error the library reports. The CLI maps subclasses to exit
// codes: input errors 1, unsupported features 2, consistency violations 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " +
              message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Well-formed syntax with invalid meaning: arity clash, undeclared symbol,
// free variable in a sentence, reference to an untracked predicate.
class SemanticError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Raised when an internal invariant fails: negative count, inexact division.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace fo2
