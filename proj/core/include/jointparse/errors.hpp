#pragma once

#include <stdexcept>
#include <string>

namespace jointparse {

/// Malformed bracketed input. Line and column are 1-based; 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// A tree violates a structural rule (two satellites, missing relation, ...).
class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// EDU text cannot be matched against the constituency tokenization.
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace jointparse
