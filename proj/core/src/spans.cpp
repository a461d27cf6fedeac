#include "jointparse/spans.hpp"

#include <algorithm>

namespace jointparse {

namespace {

void collect_spans(const Node& node, std::vector<LabeledSpan>& out) {
  if (node.is_leaf()) return;
  const Span span = extent(node);
  std::string chain = render_label(node.label);
  const Node* bottom = &node;
  while (bottom->children.size() == 1 && !bottom->children.front().is_leaf()) {
    bottom = &bottom->children.front();
    chain += '+';
    chain += render_label(bottom->label);
  }
  out.push_back({span.begin, span.end, std::move(chain)});
  for (const auto& child : bottom->children) collect_spans(child, out);
}

void collect_edus(const Node& node, std::vector<EduSpan>& out) {
  for (const auto& child : node.children) {
    if (!child.is_leaf() && child.label.is_discourse()) {
      collect_edus(child, out);
    } else {
      const Span span = extent(child);
      out.push_back({span.begin, span.end});
    }
  }
}

}  // namespace

std::vector<LabeledSpan> labeled_spans(const JointTree& tree) {
  std::vector<LabeledSpan> spans;
  collect_spans(tree.root, spans);
  std::sort(spans.begin(), spans.end());
  return spans;
}

std::vector<EduSpan> extract_edus(const JointTree& tree) {
  std::vector<EduSpan> edus;
  if (!tree.root.is_leaf() && tree.root.label.is_discourse()) {
    collect_edus(tree.root, edus);
  } else {
    edus.push_back({0, static_cast<int>(tree.tokens.size())});
  }
  return edus;
}

bool tiles(std::span<const EduSpan> edus, int n) {
  int expected = 0;
  for (const auto& edu : edus) {
    if (edu.start != expected || edu.end <= edu.start) return false;
    expected = edu.end;
  }
  return expected == n && n > 0;
}

bool is_laminar(std::span<const LabeledSpan> spans) {
  for (std::size_t a = 0; a < spans.size(); ++a) {
    for (std::size_t b = a + 1; b < spans.size(); ++b) {
      const auto& x = spans[a];
      const auto& y = spans[b];
      const bool disjoint = x.end <= y.begin || y.end <= x.begin;
      const bool nested = (x.begin <= y.begin && y.end <= x.end) || (y.begin <= x.begin && x.end <= y.end);
      if (!disjoint && !nested) return false;
    }
  }
  return true;
}

}  // namespace jointparse
