#pragma once

// Bracketed-tree reader shared by the constituency and joint formats.

#include <string>
#include <string_view>
#include <vector>

namespace jointparse::detail {

struct SExpr {
  bool is_atom = false;
  std::string text;  // atom text, or the node label
  std::vector<SExpr> children;
  int line = 0;
  int column = 0;
};

// Reads every top-level bracketed expression in `text`. Throws ParseError
// with the offending location on unbalanced brackets, bare top-level atoms,
// and empty constituents.
std::vector<SExpr> read_sexprs(std::string_view text);

}  // namespace jointparse::detail
