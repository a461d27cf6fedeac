#include "jointparse/ptb.hpp"

#include <array>
#include <utility>

#include "jointparse/errors.hpp"
#include "sexpr.hpp"

namespace jointparse {

namespace {

constexpr std::array<std::pair<std::string_view, std::string_view>, 4> kEscapes{{
    {"-LRB-", "("},
    {"-RRB-", ")"},
    {"-LCB-", "{"},
    {"-RCB-", "}"},
}};

Node build(const detail::SExpr& expr, std::vector<std::string>& tokens) {
  if (expr.is_atom) {
    tokens.push_back(unescape_token(expr.text));
    return Node::leaf(static_cast<int>(tokens.size()) - 1);
  }
  if (expr.text.empty()) throw ParseError("constituent without a label", expr.line, expr.column);
  std::vector<Node> children;
  children.reserve(expr.children.size());
  for (const auto& child : expr.children) children.push_back(build(child, tokens));
  return Node::internal(Label::syntactic(expr.text), std::move(children));
}

std::string strip_tag(const std::string& label) {
  if (label.empty() || label.front() == '-') return label;
  const auto cut = label.find_first_of("-=");
  return cut == std::string::npos ? label : label.substr(0, cut);
}

// Returns false when the node vanishes entirely.
bool strip(const Node& in, const std::vector<std::string>& in_tokens, Node& out,
           std::vector<std::string>& out_tokens) {
  if (in.is_leaf()) {
    out_tokens.push_back(in_tokens[in.token]);
    out = Node::leaf(static_cast<int>(out_tokens.size()) - 1);
    return true;
  }
  if (in.label.name == "-NONE-") return false;
  std::vector<Node> children;
  for (const auto& child : in.children) {
    Node kept;
    if (strip(child, in_tokens, kept, out_tokens)) children.push_back(std::move(kept));
  }
  if (children.empty()) return false;
  out = Node::internal(Label::syntactic(strip_tag(in.label.name)), std::move(children));
  return true;
}

}  // namespace

std::string unescape_token(std::string_view token) {
  for (const auto& [escaped, plain] : kEscapes) {
    if (token == escaped) return std::string(plain);
  }
  return std::string(token);
}

std::string escape_token(std::string_view token) {
  for (const auto& [escaped, plain] : kEscapes) {
    if (token == plain) return std::string(escaped);
  }
  return std::string(token);
}

std::vector<SyntaxTree> read_ptb(std::string_view text) {
  std::vector<SyntaxTree> trees;
  for (const auto& expr : detail::read_sexprs(text)) {
    const detail::SExpr* top = &expr;
    while (top->text.empty() && top->children.size() == 1 && !top->children.front().is_atom) {
      top = &top->children.front();
    }
    SyntaxTree tree;
    tree.root = build(*top, tree.tokens);
    trees.push_back(std::move(tree));
  }
  return trees;
}

SyntaxTree strip_empty_and_function_tags(const SyntaxTree& tree) {
  SyntaxTree out;
  if (!strip(tree.root, tree.tokens, out.root, out.tokens)) return SyntaxTree{};
  return out;
}

}  // namespace jointparse
