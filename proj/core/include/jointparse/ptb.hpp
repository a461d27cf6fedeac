#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "jointparse/tree.hpp"

namespace jointparse {

/// One constituency tree. Leaf indices are local to `tokens`.
struct SyntaxTree {
  std::vector<std::string> tokens;
  Node root;

  bool operator==(const SyntaxTree&) const = default;
};

// Reads Penn-Treebank-style s-expressions. An outer unlabeled wrapper
// "( (S ...) )" is removed. Bracket escapes are unescaped in token text.
std::vector<SyntaxTree> read_ptb(std::string_view text);

// Drops -NONE- elements (and constituents left empty by that), then cuts
// functional tags and coindexation ("NP-SBJ-1" -> "NP", "NP=2" -> "NP").
// Returns a tree with no tokens when nothing overt remains.
SyntaxTree strip_empty_and_function_tags(const SyntaxTree& tree);

std::string unescape_token(std::string_view token);
std::string escape_token(std::string_view token);

}  // namespace jointparse
