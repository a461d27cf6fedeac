#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jointparse/ptb.hpp"
#include "jointparse/tree.hpp"

namespace jointparse {

struct SyntheticParams {
  int max_tokens = 40;
  int max_edus = 6;
  int vocabulary_size = 200;
  std::vector<std::string> phrase_labels{"S", "NP", "VP", "PP", "SBAR", "ADJP"};
  std::vector<std::string> tag_labels{"NN", "NNS", "NNP", "VBD", "VBZ", "DT", "IN", "JJ", "RB", "CC"};
  std::vector<std::string> relations{"Elaboration", "Attribution", "Background", "Purpose", "Contrast", "Cause"};
  std::vector<std::string> multinuclear_relations{"List", "Joint", "Same-Unit", "Sequence"};
  double unary_probability = 0.15;
  double multinuclear_probability = 0.3;
};

// Pseudo-random joint tree, reproducible from `seed`. Throws
// std::invalid_argument on degenerate parameters (no tokens, no labels).
JointTree generate_synthetic(std::uint64_t seed, const SyntheticParams& params = {});

std::vector<JointTree> generate_treebank(std::uint64_t seed, int count, const SyntheticParams& params = {});

// Splits a joint tree into the inputs a conversion would start from: the
// discourse skeleton and one constituency tree per EDU, except that EDUs
// rooted in the same phrase label as `sentence_label` are merged into one
// flat sentence tree when adjacent, which forces the multi-subtree rule.
struct SpliceInputs {
  JointTree skeleton;
  std::vector<EduSpan> edus;
  std::vector<SyntaxTree> sentences;
};
SpliceInputs decompose(const JointTree& tree, const std::string& sentence_label = "S");

}  // namespace jointparse
