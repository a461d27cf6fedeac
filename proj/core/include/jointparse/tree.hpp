#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jointparse {

// Direction of a discourse relation. The arrow points from satellite to
// nucleus: "Rel->" has the satellite on the left, "<-Rel" on the right.
enum class Nuclearity { SatelliteThenNucleus, NucleusThenSatellite, MultiNuclear };

struct Label {
  std::string name;
  std::optional<Nuclearity> nuclearity;  // engaged iff discourse label

  static Label syntactic(std::string name);
  static Label discourse(std::string relation, Nuclearity form);

  bool is_discourse() const { return nuclearity.has_value(); }
  bool operator==(const Label&) const = default;
};

// "NP", "Background->", "<-Purpose", "List".
std::string render_label(const Label& label);

// Inverse of render_label. An arrow-free label is read as a multi-nuclear
// relation iff it contains a lowercase letter (treebank nonterminals and
// tags never do).
Label parse_label(std::string_view text);

// A chain of labels joined by '+', outermost first ("S+VP").
std::vector<std::string> split_chain(std::string_view chain);
bool chain_is_discourse(std::string_view chain);

struct Node {
  Label label;             // meaningless on leaves
  int token = -1;          // >= 0 on leaves
  std::vector<Node> children;

  static Node leaf(int token);
  static Node internal(Label label, std::vector<Node> children);

  bool is_leaf() const { return token >= 0; }
  bool operator==(const Node&) const = default;
};

struct JointTree {
  std::vector<std::string> tokens;
  Node root;

  bool operator==(const JointTree&) const = default;
};

/// Half-open token extent [begin, end).
struct Span {
  int begin = 0;
  int end = 0;

  int width() const { return end - begin; }
  auto operator<=>(const Span&) const = default;
};

Span extent(const Node& node);

struct EduSpan {
  int start = 0;
  int end = 0;

  auto operator<=>(const EduSpan&) const = default;
};

struct LabeledSpan {
  int begin = 0;
  int end = 0;
  std::string chain;

  auto operator<=>(const LabeledSpan&) const = default;
};

/// Every JointTree invariant violated by `tree`, empty when valid.
std::vector<std::string> invariant_violations(const JointTree& tree);

/// Throws StructureError listing the first violation.
void validate(const JointTree& tree);

int count_nodes(const Node& node);

}  // namespace jointparse
