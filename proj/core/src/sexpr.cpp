#include "sexpr.hpp"

#include <cctype>

#include "jointparse/errors.hpp"

namespace jointparse::detail {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip_space();
    while (pos_ < text_.size()) {
      if (text_[pos_] != '(') {
        if (text_[pos_] == ')') throw ParseError("unbalanced brackets: unexpected ')'", line_, column_);
        throw ParseError("expected '(' at top level", line_, column_);
      }
      out.push_back(read_node());
      skip_space();
    }
    return out;
  }

 private:
  SExpr read_node() {
    SExpr node;
    node.line = line_;
    node.column = column_;
    advance();  // '('
    skip_space();
    if (at_end()) throw ParseError("unbalanced brackets: '(' never closed", node.line, node.column);
    if (text_[pos_] == ')') throw ParseError("empty constituent '()'", node.line, node.column);
    if (text_[pos_] != '(') node.text = read_atom();
    while (true) {
      skip_space();
      if (at_end()) throw ParseError("unbalanced brackets: '(' never closed", node.line, node.column);
      const char c = text_[pos_];
      if (c == ')') {
        advance();
        break;
      }
      if (c == '(') {
        node.children.push_back(read_node());
      } else {
        SExpr atom;
        atom.is_atom = true;
        atom.line = line_;
        atom.column = column_;
        atom.text = read_atom();
        node.children.push_back(std::move(atom));
      }
    }
    if (node.children.empty()) {
      throw ParseError("empty constituent '(" + node.text + ")'", node.line, node.column);
    }
    return node;
  }

  std::string read_atom() {
    const auto start = pos_;
    while (!at_end()) {
      const char c = text_[pos_];
      if (c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c))) break;
      advance();
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
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

  bool at_end() const { return pos_ >= text_.size(); }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

}  // namespace

std::vector<SExpr> read_sexprs(std::string_view text) { return Reader(text).read_all(); }

}  // namespace jointparse::detail
