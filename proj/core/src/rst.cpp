#include "jointparse/rst.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "jointparse/errors.hpp"
#include "jointparse/spans.hpp"

namespace jointparse {

namespace {

class DisReader {
 public:
  explicit DisReader(std::string_view text) : text_(text) {}

  RstNode read_document() {
    skip_space();
    RstNode root = read_node();
    skip_space();
    if (pos_ < text_.size()) fail("trailing input after the discourse tree");
    if (root.role != Role::Root) fail("top node must be Root");
    return root;
  }

 private:
  RstNode read_node() {
    const int line = line_;
    const int column = column_;
    expect('(');
    RstNode node;
    const std::string role = read_atom();
    if (role == "Root") {
      node.role = Role::Root;
    } else if (role == "Nucleus") {
      node.role = Role::Nucleus;
    } else if (role == "Satellite") {
      node.role = Role::Satellite;
    } else {
      throw ParseError("unknown node role '" + role + "'", line, column);
    }
    bool is_leaf = false;
    bool has_text = false;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) throw ParseError("unbalanced brackets: node never closed", line, column);
      if (text_[pos_] == ')') {
        advance();
        break;
      }
      if (text_[pos_] != '(') fail("expected '('");
      const std::string head = peek_head();
      if (head == "span" || head == "leaf") {
        expect('(');
        read_atom();
        is_leaf = head == "leaf";
        skip_space();
        while (pos_ < text_.size() && text_[pos_] != ')') {
          read_atom();
          skip_space();
        }
        expect(')');
      } else if (head == "rel2par") {
        expect('(');
        read_atom();
        node.relation = read_atom();
        skip_space();
        expect(')');
      } else if (head == "text") {
        expect('(');
        read_atom();
        node.text = read_text();
        has_text = true;
        skip_space();
        expect(')');
      } else {
        node.children.push_back(read_node());
      }
    }
    if (is_leaf != node.children.empty()) {
      throw ParseError(is_leaf ? "leaf node has children" : "span node has no children", line, column);
    }
    if (is_leaf && !has_text) throw ParseError("leaf node without text", line, column);
    return node;
  }

  std::string peek_head() {
    const auto saved_pos = pos_;
    const auto saved_line = line_;
    const auto saved_column = column_;
    advance();
    std::string head = read_atom();
    pos_ = saved_pos;
    line_ = saved_line;
    column_ = saved_column;
    return head;
  }

  std::string read_text() {
    skip_space();
    if (text_.substr(pos_, 2) != "_!") fail("expected _! text delimiter");
    advance();
    advance();
    const auto close = text_.find("_!", pos_);
    if (close == std::string_view::npos) fail("unterminated _! text");
    std::string out(text_.substr(pos_, close - pos_));
    while (pos_ < close + 2) advance();
    return out;
  }

  std::string read_atom() {
    skip_space();
    const auto start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c))) break;
      advance();
    }
    if (start == pos_) fail("expected a symbol");
    return std::string(text_.substr(start, pos_ - start));
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size()) fail(std::string("unbalanced brackets: expected '") + c + "'");
    if (text_[pos_] != c) fail(std::string("expected '") + c + "'");
    advance();
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, column_); }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

bool names_relation(const std::string& relation) { return !relation.empty() && relation != "span"; }

void check_structure(const RstNode& node) {
  if (node.is_edu()) return;
  int nuclei = 0;
  int satellites = 0;
  for (const auto& child : node.children) {
    if (child.role == Role::Nucleus) ++nuclei;
    if (child.role == Role::Satellite) ++satellites;
    if (child.role == Role::Root) throw StructureError("Root node below the top of the tree");
  }
  if (node.children.size() < 2) throw StructureError("internal discourse node with a single child");
  if (satellites == 0) {
    for (const auto& child : node.children) {
      if (!names_relation(child.relation)) throw StructureError("multi-nuclear node without a relation");
    }
  } else if (satellites == 1 && nuclei == 1) {
    for (const auto& child : node.children) {
      if (child.role == Role::Satellite && !names_relation(child.relation)) {
        throw StructureError("satellite without a relation");
      }
    }
  } else if (nuclei == 0) {
    throw StructureError("discourse node with " + std::to_string(satellites) + " satellites and no nucleus");
  } else {
    throw StructureError("discourse node with " + std::to_string(nuclei) + " nuclei and " +
                         std::to_string(satellites) + " satellites");
  }
  for (const auto& child : node.children) check_structure(child);
}

std::string clean_edu_text(std::string text) {
  for (std::size_t at; (at = text.find("<P>")) != std::string::npos;) text.erase(at, 3);
  const auto first = text.find_first_not_of(" \t\r\n");
  const auto last = text.find_last_not_of(" \t\r\n");
  return first == std::string::npos ? std::string() : text.substr(first, last - first + 1);
}

Node convert_node(const RstNode& node, std::vector<std::string>& edus) {
  if (node.is_edu()) {
    edus.push_back(clean_edu_text(node.text));
    return Node::leaf(static_cast<int>(edus.size()) - 1);
  }
  std::vector<Node> children;
  for (const auto& child : node.children) children.push_back(convert_node(child, edus));
  const RstNode* satellite = nullptr;
  for (const auto& child : node.children) {
    if (child.role == Role::Satellite) satellite = &child;
  }
  if (satellite == nullptr) {
    const auto& relation = node.children.front().relation;
    const bool readable = std::any_of(relation.begin(), relation.end(),
                                      [](char c) { return std::islower(static_cast<unsigned char>(c)); });
    if (!readable) {
      throw StructureError("multi-nuclear relation '" + relation + "' has no lowercase letter");
    }
    return Node::internal(Label::discourse(relation, Nuclearity::MultiNuclear), std::move(children));
  }
  const bool satellite_first = &node.children.front() == satellite;
  return Node::internal(
      Label::discourse(satellite->relation,
                       satellite_first ? Nuclearity::SatelliteThenNucleus : Nuclearity::NucleusThenSatellite),
      std::move(children));
}

// Character stream with quote variants folded and whitespace removed.
std::string normalize(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if ((c == '`' || c == '\'') && i + 1 < text.size() && text[i + 1] == c) {
      out += '"';
      ++i;
      continue;
    }
    out += c;
  }
  return out;
}

// Absolute copy of `node` with token indices shifted by `offset`.
Node shifted(const Node& node, int offset) {
  if (node.is_leaf()) return Node::leaf(node.token + offset);
  Node copy = Node::internal(node.label, {});
  copy.children.reserve(node.children.size());
  for (const auto& child : node.children) copy.children.push_back(shifted(child, offset));
  return copy;
}

// Maximal subtrees of `node` lying inside [begin, end), in order.
void cover(const Node& node, int begin, int end, std::vector<const Node*>& out) {
  const Span span = extent(node);
  if (span.end <= begin || span.begin >= end) return;
  if (begin <= span.begin && span.end <= end) {
    out.push_back(&node);
    return;
  }
  for (const auto& child : node.children) cover(child, begin, end, out);
}

const Node& lowest_common_ancestor(const Node& root, int begin, int end) {
  const Node* node = &root;
  while (true) {
    const Node* inner = nullptr;
    for (const auto& child : node->children) {
      const Span span = extent(child);
      if (!child.is_leaf() && span.begin <= begin && end <= span.end) inner = &child;
    }
    if (inner == nullptr) return *node;
    node = inner;
  }
}

Node edu_subtree(const SyntaxTree& sentence, int offset, EduSpan edu) {
  const int begin = edu.start - offset;
  const int end = edu.end - offset;
  std::vector<const Node*> parts;
  cover(sentence.root, begin, end, parts);
  if (parts.size() == 1) return shifted(*parts.front(), offset);
  const Node& ancestor = lowest_common_ancestor(sentence.root, begin, end);
  std::vector<Node> children;
  children.reserve(parts.size());
  for (const Node* part : parts) children.push_back(shifted(*part, offset));
  return Node::internal(ancestor.label, std::move(children));
}

Node replace_leaves(const Node& node, std::vector<Node>& subtrees) {
  if (node.is_leaf()) return std::move(subtrees.at(node.token));
  Node copy = Node::internal(node.label, {});
  for (const auto& child : node.children) copy.children.push_back(replace_leaves(child, subtrees));
  return copy;
}

}  // namespace

RstTree read_rst(std::string_view text) {
  RstTree tree{DisReader(text).read_document()};
  check_structure(tree.root);
  return tree;
}

int count_edus(const RstNode& node) {
  if (node.is_edu()) return 1;
  int total = 0;
  for (const auto& child : node.children) total += count_edus(child);
  return total;
}

JointTree convert_rst(const RstTree& rst) {
  JointTree skeleton;
  skeleton.root = convert_node(rst.root, skeleton.tokens);
  return skeleton;
}

std::vector<EduSpan> align_edus(std::span<const std::string> edu_texts, std::span<const std::string> tokens) {
  std::string token_stream;
  std::vector<std::size_t> token_ends;
  for (const auto& token : tokens) {
    token_stream += normalize(token);
    token_ends.push_back(token_stream.size());
  }
  std::vector<EduSpan> edus;
  std::size_t position = 0;
  int next_token = 0;
  for (std::size_t k = 0; k < edu_texts.size(); ++k) {
    const std::string piece = normalize(edu_texts[k]);
    if (piece.empty()) throw AlignmentError("EDU " + std::to_string(k) + " is empty");
    if (token_stream.compare(position, piece.size(), piece) != 0) {
      throw AlignmentError("EDU " + std::to_string(k) + " text does not match the constituency tokens at character " +
                           std::to_string(position));
    }
    position += piece.size();
    const int start = next_token;
    while (next_token < static_cast<int>(token_ends.size()) && token_ends[next_token] < position) ++next_token;
    if (next_token >= static_cast<int>(token_ends.size()) || token_ends[next_token] != position) {
      throw AlignmentError("EDU " + std::to_string(k) + " ends inside token " + std::to_string(next_token));
    }
    ++next_token;
    edus.push_back({start, next_token});
  }
  if (position != token_stream.size()) {
    throw AlignmentError("constituency tokens extend beyond the last EDU");
  }
  return edus;
}

JointTree splice_edus(const JointTree& skeleton, std::span<const SyntaxTree> sentences) {
  std::vector<std::string> tokens;
  for (const auto& sentence : sentences) tokens.insert(tokens.end(), sentence.tokens.begin(), sentence.tokens.end());
  const auto edus = align_edus(skeleton.tokens, tokens);
  return splice_edus(skeleton, edus, sentences);
}

JointTree splice_edus(const JointTree& skeleton, std::span<const EduSpan> edus,
                      std::span<const SyntaxTree> sentences) {
  if (sentences.empty()) throw AlignmentError("no constituency trees for the document");
  if (edus.size() != skeleton.tokens.size()) {
    throw AlignmentError("skeleton has " + std::to_string(skeleton.tokens.size()) + " EDUs but " +
                         std::to_string(edus.size()) + " ranges were given");
  }
  JointTree joint;
  std::vector<int> offsets;
  for (const auto& sentence : sentences) {
    offsets.push_back(static_cast<int>(joint.tokens.size()));
    joint.tokens.insert(joint.tokens.end(), sentence.tokens.begin(), sentence.tokens.end());
  }
  offsets.push_back(static_cast<int>(joint.tokens.size()));
  if (!tiles(edus, static_cast<int>(joint.tokens.size()))) {
    throw AlignmentError("EDU ranges do not tile the document");
  }

  std::vector<Node> subtrees;
  subtrees.reserve(edus.size());
  std::size_t sentence = 0;
  for (std::size_t k = 0; k < edus.size(); ++k) {
    const auto& edu = edus[k];
    while (offsets[sentence + 1] <= edu.start) ++sentence;
    if (edu.end > offsets[sentence + 1]) {
      throw AlignmentError("EDU " + std::to_string(k) + " crosses a sentence boundary");
    }
    subtrees.push_back(edu_subtree(sentences[sentence], offsets[sentence], edu));
  }
  joint.root = replace_leaves(skeleton.root, subtrees);
  validate(joint);
  return joint;
}

JointTree convert_document(std::string_view rst_text, std::string_view ptb_text) {
  const JointTree skeleton = convert_rst(read_rst(rst_text));
  std::vector<SyntaxTree> sentences;
  for (const auto& tree : read_ptb(ptb_text)) {
    auto stripped = strip_empty_and_function_tags(tree);
    if (!stripped.tokens.empty()) sentences.push_back(std::move(stripped));
  }
  return splice_edus(skeleton, sentences);
}

}  // namespace jointparse
