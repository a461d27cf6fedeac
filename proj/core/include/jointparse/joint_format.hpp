#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jointparse/tree.hpp"

namespace jointparse {

// Single-line bracketed rendering; discourse labels use ASCII arrows.
std::string write_joint(const JointTree& tree);

// Reads exactly one tree. Throws ParseError on malformed brackets or labels.
// Structural invariants are not enforced here (parser output may break
// layering); call validate() for gold data.
JointTree read_joint(std::string_view text);

// Treebank files: one tree per blank-line-separated block.
std::string write_treebank(std::span<const JointTree> trees);
std::vector<JointTree> read_treebank(std::string_view text);

// EDU segmentation line: space-separated "start:end" ranges.
std::string write_edu_line(std::span<const EduSpan> edus);
std::vector<EduSpan> read_edu_line(std::string_view line);

// Pre-tokenized documents: one per blank-line-separated block, tokens
// separated by whitespace (newlines inside a block are token separators).
std::vector<std::vector<std::string>> read_token_documents(std::string_view text);

}  // namespace jointparse
