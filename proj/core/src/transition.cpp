#include "jointparse/transition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "jointparse/errors.hpp"
#include "jointparse/spans.hpp"

namespace jointparse {

std::string to_mnemonic(const Action& action) {
  switch (action.kind) {
    case Action::Kind::Shift:
      return "SH";
    case Action::Kind::Combine:
      return "CB";
    case Action::Kind::Label:
      return "L:" + action.chain;
    case Action::Kind::NoLabel:
      return "NL";
  }
  return {};
}

Action parse_mnemonic(std::string_view text) {
  if (text == "SH") return Action::shift();
  if (text == "CB") return Action::combine();
  if (text == "NL") return Action::no_label();
  if (text.size() > 2 && text.substr(0, 2) == "L:") return Action::label(std::string(text.substr(2)));
  throw ParseError("unknown action mnemonic '" + std::string(text) + "'");
}

std::string write_derivation(std::span<const Action> actions) {
  std::string out;
  for (const auto& action : actions) {
    if (!out.empty()) out += ' ';
    out += to_mnemonic(action);
  }
  return out;
}

std::vector<Action> read_derivation(std::string_view text) {
  std::vector<Action> actions;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) actions.push_back(parse_mnemonic(word));
  return actions;
}

ParserState ParserState::axiom(int n) {
  if (n < 1) throw std::invalid_argument("parser state needs at least one token");
  ParserState state;
  state.n = n;
  return state;
}

bool ParserState::is_terminal() const {
  return !midpoint && boundaries.size() == 3 && boundaries[2] == n;
}

Phase phase(const ParserState& state) { return state.midpoint ? Phase::Label : Phase::Structural; }

bool can_shift(const ParserState& state) { return !state.midpoint && state.boundaries.back() < state.n; }

bool can_combine(const ParserState& state) { return !state.midpoint && state.boundaries.size() >= 4; }

bool can_skip_label(const ParserState& state) {
  if (!state.midpoint) return false;
  const Span top = state.top();
  return !(top.begin == 0 && top.end == state.n);
}

std::vector<Action> legal_actions(const ParserState& state, std::span<const std::string> inventory) {
  if (state.is_terminal()) throw std::logic_error("no actions are legal in a terminal state");
  std::vector<Action> actions;
  if (phase(state) == Phase::Structural) {
    if (can_shift(state)) actions.push_back(Action::shift());
    if (can_combine(state)) actions.push_back(Action::combine());
    return actions;
  }
  for (const auto& chain : inventory) actions.push_back(Action::label(chain));
  if (can_skip_label(state)) actions.push_back(Action::no_label());
  return actions;
}

bool is_legal(const ParserState& state, const Action& action) {
  if (state.is_terminal()) return false;
  switch (action.kind) {
    case Action::Kind::Shift:
      return can_shift(state);
    case Action::Kind::Combine:
      return can_combine(state);
    case Action::Kind::Label:
      return state.midpoint.has_value() && !action.chain.empty();
    case Action::Kind::NoLabel:
      return can_skip_label(state);
  }
  return false;
}

ParserState apply(const ParserState& state, const Action& action, double score) {
  if (!is_legal(state, action)) {
    throw std::logic_error("illegal action " + to_mnemonic(action));
  }
  ParserState next = state;
  next.score += score;
  switch (action.kind) {
    case Action::Kind::Shift: {
      const int j = next.boundaries.back();
      next.boundaries.push_back(j + 1);
      next.midpoint = j;
      break;
    }
    case Action::Kind::Combine: {
      const auto k = next.boundaries.end() - 2;
      next.midpoint = *k;
      next.boundaries.erase(k);
      break;
    }
    case Action::Kind::Label: {
      const Span top = next.top();
      next.labeled.push_back({top.begin, top.end, action.chain});
      next.midpoint.reset();
      break;
    }
    case Action::Kind::NoLabel:
      next.midpoint.reset();
      break;
  }
  return next;
}

ParserState macro_shift(const ParserState& state, int end, double score) {
  const int j = state.boundaries.back();
  if (!can_shift(state) || end <= j || end > state.n) {
    throw std::logic_error("illegal macro-shift to " + std::to_string(end));
  }
  ParserState next = state;
  next.score += score;
  next.boundaries.push_back(end);
  next.midpoint = j;
  return next;
}

ParserState replay(int n, std::span<const Action> actions) {
  ParserState state = ParserState::axiom(n);
  for (const auto& action : actions) state = apply(state, action);
  return state;
}

namespace {

void derive(const Node& node, std::vector<Action>& out) {
  if (node.is_leaf()) {
    out.push_back(Action::shift());
    out.push_back(Action::no_label());
    return;
  }
  std::string chain = render_label(node.label);
  const Node* bottom = &node;
  while (bottom->children.size() == 1 && !bottom->children.front().is_leaf()) {
    bottom = &bottom->children.front();
    chain += '+';
    chain += render_label(bottom->label);
  }
  if (bottom->children.size() == 1) {
    out.push_back(Action::shift());
    out.push_back(Action::label(std::move(chain)));
    return;
  }
  derive(bottom->children.front(), out);
  for (std::size_t c = 1; c < bottom->children.size(); ++c) {
    derive(bottom->children[c], out);
    out.push_back(Action::combine());
    if (c + 1 == bottom->children.size()) {
      out.push_back(Action::label(chain));
    } else {
      out.push_back(Action::no_label());
    }
  }
}

}  // namespace

std::vector<Action> static_oracle(const JointTree& gold) {
  std::vector<Action> actions;
  derive(gold.root, actions);
  return actions;
}

GoldSpans::GoldSpans(std::vector<LabeledSpan> spans) : spans_(std::move(spans)) {
  for (const auto& span : spans_) by_extent_.emplace(std::make_pair(span.begin, span.end), span.chain);
}

GoldSpans::GoldSpans(const JointTree& tree) : GoldSpans(labeled_spans(tree)) {}

const std::string* GoldSpans::find(int begin, int end) const {
  const auto it = by_extent_.find({begin, end});
  return it == by_extent_.end() ? nullptr : &it->second;
}

int reachable_count(const ParserState& state, const GoldSpans& gold) {
  int count = 0;
  for (const auto& span : state.labeled) {
    const std::string* chain = gold.find(span.begin, span.end);
    if (chain != nullptr && *chain == span.chain) ++count;
  }
  const Span top = state.top();
  const bool label_phase = phase(state) == Phase::Label;
  auto on_stack = [&](int boundary) {
    return std::binary_search(state.boundaries.begin(), state.boundaries.end(), boundary);
  };
  for (const auto& span : gold.all()) {
    const int l = span.begin;
    const int r = span.end;
    const bool pending = (r > top.end && (on_stack(l) || l >= top.end)) ||
                         (r == top.end && on_stack(l) && l < top.begin) ||
                         (label_phase && l == top.begin && r == top.end);
    if (pending) ++count;
  }
  return count;
}

std::vector<Action> dynamic_oracle(const ParserState& state, const GoldSpans& gold) {
  if (state.is_terminal()) throw std::logic_error("dynamic oracle queried on a terminal state");
  if (phase(state) == Phase::Label) {
    const Span top = state.top();
    if (const std::string* chain = gold.find(top.begin, top.end)) return {Action::label(*chain)};
    if (!can_skip_label(state)) throw std::logic_error("root span is missing from the gold spans");
    return {Action::no_label()};
  }
  std::vector<Action> best;
  int best_count = std::numeric_limits<int>::min();
  for (const auto& action : legal_actions(state, {})) {
    const int count = reachable_count(apply(state, action), gold);
    if (count > best_count) {
      best_count = count;
      best.clear();
    }
    if (count == best_count) best.push_back(action);
  }
  return best;
}

namespace {

struct Builder {
  std::span<const LabeledSpan> spans;
  std::size_t next = 0;

  Node build() {
    const LabeledSpan& span = spans[next++];
    std::vector<Node> children;
    int position = span.begin;
    while (next < spans.size() && spans[next].begin < span.end) {
      const LabeledSpan& child = spans[next];
      if (child.end > span.end) {
        throw StructureError("crossing spans (" + std::to_string(span.begin) + "," + std::to_string(span.end) +
                             ") and (" + std::to_string(child.begin) + "," + std::to_string(child.end) + ")");
      }
      if (child.begin == span.begin && child.end == span.end) {
        throw StructureError("duplicate span (" + std::to_string(span.begin) + "," + std::to_string(span.end) + ")");
      }
      while (position < child.begin) children.push_back(Node::leaf(position++));
      children.push_back(build());
      position = child.end;
    }
    while (position < span.end) children.push_back(Node::leaf(position++));

    const auto labels = split_chain(span.chain);
    Node node = Node::internal(parse_label(labels.back()), std::move(children));
    for (auto it = labels.rbegin() + 1; it != labels.rend(); ++it) {
      node = Node::internal(parse_label(*it), {std::move(node)});
    }
    return node;
  }
};

}  // namespace

JointTree reconstruct(std::span<const LabeledSpan> spans, std::vector<std::string> tokens) {
  const int n = static_cast<int>(tokens.size());
  std::vector<LabeledSpan> sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end(), [](const LabeledSpan& a, const LabeledSpan& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    return a.end > b.end;
  });
  if (sorted.empty() || sorted.front().begin != 0 || sorted.front().end != n) {
    throw StructureError("span set has no root span covering all tokens");
  }
  for (const auto& span : sorted) {
    if (span.begin < 0 || span.end > n || span.begin >= span.end) {
      throw StructureError("span (" + std::to_string(span.begin) + "," + std::to_string(span.end) +
                           ") is out of range");
    }
  }
  Builder builder{sorted};
  JointTree tree;
  tree.root = builder.build();
  if (builder.next != sorted.size()) throw StructureError("spans outside the root span");
  tree.tokens = std::move(tokens);
  return tree;
}

namespace {

template <typename Range>
std::size_t argmax(const Range& scores) {
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

}  // namespace

DecodeResult parse_greedy(SpanScorer& scorer, const std::vector<std::string>& tokens, const DecodeOptions& options) {
  const int n = static_cast<int>(tokens.size());
  if (scorer.length() != n) {
    throw std::invalid_argument("scorer was built for " + std::to_string(scorer.length()) + " tokens, got " +
                                std::to_string(n));
  }
  const auto inventory = scorer.label_inventory();
  const bool constrained = options.gold_edus.has_value();
  std::vector<int> edu_ends;
  if (constrained) {
    if (!tiles(*options.gold_edus, n)) throw std::invalid_argument("gold EDUs do not tile the document");
    for (const auto& edu : *options.gold_edus) edu_ends.push_back(edu.end);
  }
  const double minus_inf = -std::numeric_limits<double>::infinity();

  DecodeResult result;
  ParserState state = ParserState::axiom(n);
  while (!state.is_terminal()) {
    if (phase(state) == Phase::Structural) {
      auto scores = scorer.structural(state);
      if (!can_shift(state)) scores[0] = minus_inf;
      if (!can_combine(state)) scores[1] = minus_inf;
      const bool shift = scores[0] >= scores[1] && can_shift(state);
      if (shift) {
        if (constrained) {
          const int end = *std::upper_bound(edu_ends.begin(), edu_ends.end(), state.boundaries.back());
          state = macro_shift(state, end, scores[0]);
        } else {
          state = apply(state, Action::shift(), scores[0]);
        }
        result.derivation.push_back(Action::shift());
      } else {
        state = apply(state, Action::combine(), scores[1]);
        result.derivation.push_back(Action::combine());
      }
      continue;
    }

    auto scores = scorer.labels(state);
    const std::size_t no_label = inventory.size();
    if (scores.size() != inventory.size() + 1) {
      throw std::invalid_argument("scorer returned " + std::to_string(scores.size()) + " label scores for " +
                                  std::to_string(inventory.size()) + " labels");
    }
    if (constrained) {
      if (*state.midpoint == state.top().begin) {
        // A whole EDU was shifted; it stays unlabeled, even as the root.
        state.midpoint.reset();
        state.score += std::isfinite(scores[no_label]) ? scores[no_label] : 0.0;
        result.derivation.push_back(Action::no_label());
        continue;
      }
      for (std::size_t c = 0; c < inventory.size(); ++c) {
        if (!chain_is_discourse(inventory[c])) scores[c] = minus_inf;
      }
    }
    if (!can_skip_label(state)) scores[no_label] = minus_inf;
    const std::size_t best = argmax(scores);
    if (scores[best] == minus_inf) throw std::logic_error("no label action is available");
    const Action action = best == no_label ? Action::no_label() : Action::label(inventory[best]);
    state = apply(state, action, scores[best]);
    result.derivation.push_back(action);
  }

  std::vector<LabeledSpan> spans = state.labeled;
  if (constrained) {
    for (const auto& edu : *options.gold_edus) spans.push_back({edu.start, edu.end, std::string(kEduLabel)});
  }
  result.tree = reconstruct(spans, tokens);
  result.final_state = std::move(state);
  return result;
}

}  // namespace jointparse
