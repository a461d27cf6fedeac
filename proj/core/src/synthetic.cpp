#include "jointparse/synthetic.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "jointparse/spans.hpp"

namespace jointparse {

namespace {

class Generator {
 public:
  Generator(std::uint64_t seed, const SyntheticParams& params) : rng_(seed), params_(params) {}

  JointTree run() {
    JointTree tree;
    const int n = uniform(1, params_.max_tokens);
    for (int i = 0; i < n; ++i) tree.tokens.push_back("w" + std::to_string(uniform(0, params_.vocabulary_size - 1)));
    const int m = uniform(1, std::min(params_.max_edus, n));
    const auto sizes = split(n, m);
    std::vector<Node> edus;
    int start = 0;
    for (int size : sizes) {
      edus.push_back(phrase(start, start + size, /*top=*/true));
      start += size;
    }
    tree.root = discourse(edus, 0, m);
    return tree;
  }

 private:
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  const std::string& pick(const std::vector<std::string>& items) {
    return items[static_cast<std::size_t>(uniform(0, static_cast<int>(items.size()) - 1))];
  }

  // Random composition of `total` into `parts` positive sizes.
  std::vector<int> split(int total, int parts) {
    std::vector<int> cuts;
    std::vector<int> candidates;
    for (int i = 1; i < total; ++i) candidates.push_back(i);
    std::shuffle(candidates.begin(), candidates.end(), rng_);
    cuts.assign(candidates.begin(), candidates.begin() + (parts - 1));
    std::sort(cuts.begin(), cuts.end());
    std::vector<int> sizes;
    int previous = 0;
    for (int cut : cuts) {
      sizes.push_back(cut - previous);
      previous = cut;
    }
    sizes.push_back(total - previous);
    return sizes;
  }

  Node phrase(int begin, int end, bool top) {
    Node node;
    if (end - begin == 1) {
      node = Node::internal(Label::syntactic(pick(params_.tag_labels)), {Node::leaf(begin)});
    } else {
      const int arity = uniform(2, std::min(end - begin, 3));
      std::vector<Node> children;
      int start = begin;
      for (int size : split(end - begin, arity)) {
        children.push_back(phrase(start, start + size, false));
        start += size;
      }
      node = Node::internal(Label::syntactic(top ? params_.phrase_labels.front() : pick(params_.phrase_labels)),
                            std::move(children));
    }
    if (chance(params_.unary_probability)) {
      std::string label = pick(params_.phrase_labels);
      if (label != node.label.name) node = Node::internal(Label::syntactic(std::move(label)), {std::move(node)});
    }
    return node;
  }

  Node discourse(std::vector<Node>& edus, int first, int last) {
    const int count = last - first;
    if (count == 1) return std::move(edus[first]);
    if (chance(params_.multinuclear_probability)) {
      const int arity = uniform(2, std::min(count, 4));
      std::vector<Node> children;
      int start = first;
      for (int size : split(count, arity)) {
        children.push_back(discourse(edus, start, start + size));
        start += size;
      }
      return Node::internal(Label::discourse(pick(params_.multinuclear_relations), Nuclearity::MultiNuclear),
                            std::move(children));
    }
    const int mid = first + uniform(1, count - 1);
    std::vector<Node> children;
    children.push_back(discourse(edus, first, mid));
    children.push_back(discourse(edus, mid, last));
    const auto form = chance(0.5) ? Nuclearity::SatelliteThenNucleus : Nuclearity::NucleusThenSatellite;
    return Node::internal(Label::discourse(pick(params_.relations), form), std::move(children));
  }

  std::mt19937_64 rng_;
  const SyntheticParams& params_;
};

void collect_edu_nodes(const Node& node, std::vector<const Node*>& out) {
  if (!node.is_leaf() && node.label.is_discourse()) {
    for (const auto& child : node.children) collect_edu_nodes(child, out);
  } else {
    out.push_back(&node);
  }
}

Node placeholder_skeleton(const Node& node, int& next) {
  if (!node.is_leaf() && node.label.is_discourse()) {
    Node copy = Node::internal(node.label, {});
    for (const auto& child : node.children) copy.children.push_back(placeholder_skeleton(child, next));
    return copy;
  }
  return Node::leaf(next++);
}

Node local_copy(const Node& node, int offset) {
  if (node.is_leaf()) return Node::leaf(node.token - offset);
  Node copy = Node::internal(node.label, {});
  for (const auto& child : node.children) copy.children.push_back(local_copy(child, offset));
  return copy;
}

}  // namespace

JointTree generate_synthetic(std::uint64_t seed, const SyntheticParams& params) {
  if (params.max_tokens < 1) throw std::invalid_argument("synthetic trees need at least one token");
  if (params.max_edus < 1) throw std::invalid_argument("synthetic trees need at least one EDU");
  if (params.vocabulary_size < 1) throw std::invalid_argument("synthetic vocabulary is empty");
  if (params.phrase_labels.empty() || params.tag_labels.empty() || params.relations.empty() ||
      params.multinuclear_relations.empty()) {
    throw std::invalid_argument("synthetic label inventories must be non-empty");
  }
  return Generator(seed, params).run();
}

std::vector<JointTree> generate_treebank(std::uint64_t seed, int count, const SyntheticParams& params) {
  std::vector<JointTree> trees;
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(std::max(count, 0)));
  std::mt19937_64 rng(seed);
  for (auto& s : seeds) s = rng();
  for (auto s : seeds) trees.push_back(generate_synthetic(s, params));
  return trees;
}

SpliceInputs decompose(const JointTree& tree, const std::string& sentence_label) {
  SpliceInputs inputs;
  int next = 0;
  inputs.skeleton.root = placeholder_skeleton(tree.root, next);
  inputs.edus = extract_edus(tree);

  std::vector<const Node*> edu_nodes;
  collect_edu_nodes(tree.root, edu_nodes);
  for (std::size_t k = 0; k < edu_nodes.size(); ++k) {
    inputs.skeleton.tokens.push_back("edu" + std::to_string(k));
  }

  // Runs of adjacent EDUs rooted in `sentence_label` with >= 2 children
  // become one flat sentence; everything else is its own sentence.
  auto flattenable = [&](const Node* node) {
    return !node->is_leaf() && node->label.name == sentence_label && node->children.size() >= 2;
  };
  std::size_t k = 0;
  while (k < edu_nodes.size()) {
    std::size_t run_end = k + 1;
    if (flattenable(edu_nodes[k])) {
      while (run_end < edu_nodes.size() && flattenable(edu_nodes[run_end])) ++run_end;
    }
    const int offset = inputs.edus[k].start;
    SyntaxTree sentence;
    for (int t = offset; t < inputs.edus[run_end - 1].end; ++t) sentence.tokens.push_back(tree.tokens[t]);
    if (run_end - k == 1) {
      sentence.root = local_copy(*edu_nodes[k], offset);
      if (sentence.root.is_leaf()) sentence.root = Node::internal(Label::syntactic(sentence_label), {sentence.root});
    } else {
      sentence.root = Node::internal(Label::syntactic(sentence_label), {});
      for (std::size_t e = k; e < run_end; ++e) {
        for (const auto& child : edu_nodes[e]->children) sentence.root.children.push_back(local_copy(child, offset));
      }
    }
    inputs.sentences.push_back(std::move(sentence));
    k = run_end;
  }
  return inputs;
}

}  // namespace jointparse
