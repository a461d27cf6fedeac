#include "jointparse/errors.hpp"

namespace jointparse {

namespace {

std::string located(const std::string& what, int line, int column) {
  if (line <= 0) return what;
  return what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
}

}  // namespace

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error(located(what, line, column)), line_(line), column_(column) {}

}  // namespace jointparse
