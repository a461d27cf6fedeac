#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jointparse/ptb.hpp"
#include "jointparse/tree.hpp"

namespace jointparse {

enum class Role { Root, Nucleus, Satellite };

struct RstNode {
  Role role = Role::Root;
  std::string relation;  // rel2par; "span" on nuclei of nucleus-satellite nodes
  std::string text;      // EDU text, leaves only
  std::vector<RstNode> children;

  bool is_edu() const { return children.empty(); }
  bool operator==(const RstNode&) const = default;
};

struct RstTree {
  RstNode root;
};

// Reads the RST discourse treebank's parenthesized format:
//
//   ( Root (span 1 2)
//     ( Nucleus (leaf 1) (rel2par span) (text _!...text..._!) )
//     ( Satellite (leaf 2) (rel2par Purpose) (text _!...text..._!) ) )
//
// Throws ParseError on malformed input and StructureError when a node has
// two satellites, no nucleus, or lacks the relation it needs.
RstTree read_rst(std::string_view text);

int count_edus(const RstNode& node);

// Discourse skeleton: a tree over EDU placeholders. skeleton.tokens holds
// the EDU texts and leaf k stands for EDU k. Nucleus-satellite nodes become
// "Rel->" / "<-Rel", multi-nuclear nodes keep all their children.
JointTree convert_rst(const RstTree& rst);

// Maps EDU texts onto token ranges by comparing whitespace-free character
// streams. Throws AlignmentError when the texts differ or an EDU boundary
// falls inside a token.
std::vector<EduSpan> align_edus(std::span<const std::string> edu_texts,
                                std::span<const std::string> tokens);

// Replaces each skeleton leaf by the constituency material of its EDU:
// the single subtree covering it exactly, or a node labeled with the lowest
// common ancestor's label over the maximal subtrees inside the EDU.
JointTree splice_edus(const JointTree& skeleton, std::span<const SyntaxTree> sentences);

// Same, with the EDU token ranges already known.
JointTree splice_edus(const JointTree& skeleton, std::span<const EduSpan> edus,
                      std::span<const SyntaxTree> sentences);

// read_rst + convert_rst + read_ptb + strip_empty_and_function_tags + splice.
JointTree convert_document(std::string_view rst_text, std::string_view ptb_text);

}  // namespace jointparse
