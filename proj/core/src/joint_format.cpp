#include "jointparse/joint_format.hpp"

#include <charconv>
#include <sstream>

#include "jointparse/errors.hpp"
#include "jointparse/ptb.hpp"
#include "sexpr.hpp"

namespace jointparse {

namespace {

void render(const Node& node, const std::vector<std::string>& tokens, std::string& out) {
  if (node.is_leaf()) {
    out += escape_token(tokens.at(node.token));
    return;
  }
  out += '(';
  out += render_label(node.label);
  for (const auto& child : node.children) {
    out += ' ';
    render(child, tokens, out);
  }
  out += ')';
}

Node build(const detail::SExpr& expr, std::vector<std::string>& tokens) {
  if (expr.is_atom) {
    tokens.push_back(unescape_token(expr.text));
    return Node::leaf(static_cast<int>(tokens.size()) - 1);
  }
  if (expr.text.empty()) throw ParseError("constituent without a label", expr.line, expr.column);
  Label label;
  try {
    label = parse_label(expr.text);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), expr.line, expr.column);
  }
  std::vector<Node> children;
  children.reserve(expr.children.size());
  for (const auto& child : expr.children) children.push_back(build(child, tokens));
  return Node::internal(std::move(label), std::move(children));
}

JointTree to_tree(const detail::SExpr& expr) {
  JointTree tree;
  tree.root = build(expr, tree.tokens);
  return tree;
}

}  // namespace

std::string write_joint(const JointTree& tree) {
  std::string out;
  render(tree.root, tree.tokens, out);
  return out;
}

JointTree read_joint(std::string_view text) {
  auto exprs = detail::read_sexprs(text);
  if (exprs.empty()) throw ParseError("no tree in input");
  if (exprs.size() > 1) throw ParseError("more than one tree in input", exprs[1].line, exprs[1].column);
  return to_tree(exprs.front());
}

std::string write_treebank(std::span<const JointTree> trees) {
  std::string out;
  for (const auto& tree : trees) {
    out += write_joint(tree);
    out += "\n\n";
  }
  return out;
}

std::vector<JointTree> read_treebank(std::string_view text) {
  std::vector<JointTree> trees;
  for (const auto& expr : detail::read_sexprs(text)) trees.push_back(to_tree(expr));
  return trees;
}

std::string write_edu_line(std::span<const EduSpan> edus) {
  std::string out;
  for (const auto& edu : edus) {
    if (!out.empty()) out += ' ';
    out += std::to_string(edu.start) + ':' + std::to_string(edu.end);
  }
  return out;
}

std::vector<EduSpan> read_edu_line(std::string_view line) {
  std::vector<EduSpan> edus;
  std::istringstream in{std::string(line)};
  std::string item;
  while (in >> item) {
    const auto colon = item.find(':');
    EduSpan edu;
    const char* first = item.data();
    const char* last = item.data() + item.size();
    if (colon == std::string::npos ||
        std::from_chars(first, first + colon, edu.start).ptr != first + colon ||
        std::from_chars(first + colon + 1, last, edu.end).ptr != last || edu.start < 0 ||
        edu.start >= edu.end) {
      throw ParseError("malformed EDU range '" + item + "'");
    }
    edus.push_back(edu);
  }
  return edus;
}

std::vector<std::vector<std::string>> read_token_documents(std::string_view text) {
  std::vector<std::vector<std::string>> docs;
  std::vector<std::string> current;
  std::istringstream in{std::string(text)};
  std::string line;
  auto flush = [&] {
    if (!current.empty()) docs.push_back(std::move(current));
    current.clear();
  };
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string word;
    bool any = false;
    while (words >> word) {
      current.push_back(word);
      any = true;
    }
    if (!any) flush();
  }
  flush();
  return docs;
}

}  // namespace jointparse
