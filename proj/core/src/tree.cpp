#include "jointparse/tree.hpp"

#include <algorithm>
#include <cctype>

#include "jointparse/errors.hpp"

namespace jointparse {

Label Label::syntactic(std::string name) { return Label{std::move(name), std::nullopt}; }

Label Label::discourse(std::string relation, Nuclearity form) {
  return Label{std::move(relation), form};
}

std::string render_label(const Label& label) {
  if (!label.nuclearity) return label.name;
  switch (*label.nuclearity) {
    case Nuclearity::SatelliteThenNucleus:
      return label.name + "->";
    case Nuclearity::NucleusThenSatellite:
      return "<-" + label.name;
    case Nuclearity::MultiNuclear:
      return label.name;
  }
  return label.name;
}

namespace {

bool valid_label_name(std::string_view name) {
  if (name.empty()) return false;
  return std::none_of(name.begin(), name.end(), [](char c) {
    return c == '(' || c == ')' || c == '+' || std::isspace(static_cast<unsigned char>(c));
  });
}

bool has_lowercase(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return std::islower(static_cast<unsigned char>(c)); });
}

}  // namespace

Label parse_label(std::string_view text) {
  if (text.size() > 2 && text.substr(0, 2) == "<-") {
    auto name = text.substr(2);
    if (!valid_label_name(name)) throw ParseError("malformed discourse label '" + std::string(text) + "'");
    return Label::discourse(std::string(name), Nuclearity::NucleusThenSatellite);
  }
  if (text.size() > 2 && text.substr(text.size() - 2) == "->") {
    auto name = text.substr(0, text.size() - 2);
    if (!valid_label_name(name)) throw ParseError("malformed discourse label '" + std::string(text) + "'");
    return Label::discourse(std::string(name), Nuclearity::SatelliteThenNucleus);
  }
  if (!valid_label_name(text) || text == "<-" || text == "->") {
    throw ParseError("malformed label '" + std::string(text) + "'");
  }
  if (has_lowercase(text)) return Label::discourse(std::string(text), Nuclearity::MultiNuclear);
  return Label::syntactic(std::string(text));
}

std::vector<std::string> split_chain(std::string_view chain) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto plus = chain.find('+', start);
    parts.emplace_back(chain.substr(start, plus == std::string_view::npos ? chain.npos : plus - start));
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  return parts;
}

bool chain_is_discourse(std::string_view chain) {
  for (const auto& part : split_chain(chain)) {
    if (parse_label(part).is_discourse()) return true;
  }
  return false;
}

Node Node::leaf(int token) {
  Node node;
  node.token = token;
  return node;
}

Node Node::internal(Label label, std::vector<Node> children) {
  Node node;
  node.label = std::move(label);
  node.children = std::move(children);
  return node;
}

Span extent(const Node& node) {
  if (node.is_leaf()) return {node.token, node.token + 1};
  if (node.children.empty()) return {0, 0};
  return {extent(node.children.front()).begin, extent(node.children.back()).end};
}

int count_nodes(const Node& node) {
  int total = 1;
  for (const auto& child : node.children) total += count_nodes(child);
  return total;
}

namespace {

struct Checker {
  std::vector<std::string> problems;
  int next_token = 0;

  void visit(const Node& node, bool under_syntactic) {
    if (node.is_leaf()) {
      if (node.token != next_token) {
        problems.push_back("leaf order: expected token " + std::to_string(next_token) + ", found " +
                           std::to_string(node.token));
      }
      next_token = node.token + 1;
      return;
    }
    const std::string where = "node '" + render_label(node.label) + "'";
    if (node.children.empty()) problems.push_back(where + " has no children");
    if (!valid_label_name(node.label.name)) problems.push_back(where + " has a malformed label");
    if (node.label.is_discourse()) {
      if (under_syntactic) problems.push_back(where + " is a discourse node below a syntactic node");
      if (node.children.size() < 2) problems.push_back(where + " has fewer than two children");
      if (*node.label.nuclearity != Nuclearity::MultiNuclear && node.children.size() != 2) {
        problems.push_back(where + " is a nucleus-satellite node that is not binary");
      }
    }
    for (const auto& child : node.children) visit(child, under_syntactic || !node.label.is_discourse());
  }
};

}  // namespace

std::vector<std::string> invariant_violations(const JointTree& tree) {
  Checker checker;
  if (tree.tokens.empty()) checker.problems.push_back("tree has no tokens");
  for (std::size_t i = 0; i < tree.tokens.size(); ++i) {
    const auto& text = tree.tokens[i];
    if (text.empty() || std::any_of(text.begin(), text.end(),
                                    [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
      checker.problems.push_back("token " + std::to_string(i) + " is empty or contains whitespace");
    }
  }
  if (tree.root.is_leaf()) checker.problems.push_back("root is a bare token");
  checker.visit(tree.root, false);
  if (checker.next_token != static_cast<int>(tree.tokens.size())) {
    checker.problems.push_back("leaves cover " + std::to_string(checker.next_token) + " of " +
                               std::to_string(tree.tokens.size()) + " tokens");
  }
  return checker.problems;
}

void validate(const JointTree& tree) {
  auto problems = invariant_violations(tree);
  if (!problems.empty()) throw StructureError("invalid joint tree: " + problems.front());
}

}  // namespace jointparse
