#pragma once

#include <span>
#include <vector>

#include "jointparse/tree.hpp"

namespace jointparse {

// One span per chain of same-extent internal nodes; the chain label joins
// the node labels outermost first with '+'. Sorted by (begin, end, chain).
std::vector<LabeledSpan> labeled_spans(const JointTree& tree);

// Extents of the maximal non-discourse subtrees: the children of discourse
// nodes that are not themselves discourse nodes, or the whole document when
// the tree carries no discourse node.
std::vector<EduSpan> extract_edus(const JointTree& tree);

bool tiles(std::span<const EduSpan> edus, int n);

// True when every pair of spans is nested or disjoint.
bool is_laminar(std::span<const LabeledSpan> spans);

}  // namespace jointparse
