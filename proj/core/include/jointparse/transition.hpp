#pragma once

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jointparse/tree.hpp"

namespace jointparse {

struct Action {
  enum class Kind { Shift, Combine, Label, NoLabel };

  Kind kind = Kind::Shift;
  std::string chain;  // Label only

  static Action shift() { return {Kind::Shift, {}}; }
  static Action combine() { return {Kind::Combine, {}}; }
  static Action label(std::string chain) { return {Kind::Label, std::move(chain)}; }
  static Action no_label() { return {Kind::NoLabel, {}}; }

  bool is_structural() const { return kind == Kind::Shift || kind == Kind::Combine; }
  auto operator<=>(const Action&) const = default;
};

// "SH", "CB", "L:<chain>", "NL".
std::string to_mnemonic(const Action& action);
Action parse_mnemonic(std::string_view text);
std::string write_derivation(std::span<const Action> actions);
std::vector<Action> read_derivation(std::string_view text);

enum class Phase { Structural, Label };

// Stack of span boundaries. The axiom is [-1, 0]; a midpoint marks the top
// span as freshly built and awaiting its label action.
struct ParserState {
  int n = 0;
  std::vector<int> boundaries{-1, 0};
  std::optional<int> midpoint;
  std::vector<LabeledSpan> labeled;
  double score = 0.0;

  static ParserState axiom(int n);

  // Top span (boundaries[-2], boundaries[-1]).
  Span top() const { return {boundaries[boundaries.size() - 2], boundaries.back()}; }
  bool is_terminal() const;
  bool operator==(const ParserState&) const = default;
};

Phase phase(const ParserState& state);

bool can_shift(const ParserState& state);
bool can_combine(const ParserState& state);
// NoLabel is illegal on the root span (0, n).
bool can_skip_label(const ParserState& state);

// Throws std::logic_error on a terminal state.
std::vector<Action> legal_actions(const ParserState& state, std::span<const std::string> inventory);
bool is_legal(const ParserState& state, const Action& action);

// Throws std::logic_error when the action is illegal.
ParserState apply(const ParserState& state, const Action& action, double score = 0.0);

// Shift that pushes every token up to `end` as one span (gold-EDU decoding).
ParserState macro_shift(const ParserState& state, int end, double score = 0.0);

ParserState replay(int n, std::span<const Action> actions);

// Canonical left-to-right derivation of a gold tree.
std::vector<Action> static_oracle(const JointTree& gold);

// Gold labeled spans indexed by extent.
class GoldSpans {
 public:
  GoldSpans() = default;
  explicit GoldSpans(std::vector<LabeledSpan> spans);
  explicit GoldSpans(const JointTree& tree);

  const std::string* find(int begin, int end) const;
  std::span<const LabeledSpan> all() const { return spans_; }
  std::size_t size() const { return spans_.size(); }

 private:
  std::vector<LabeledSpan> spans_;
  std::map<std::pair<int, int>, std::string> by_extent_;
};

// Gold spans already built correctly plus those still attainable from
// `state`; equals the best final |labeled ∩ gold| over all completions.
int reachable_count(const ParserState& state, const GoldSpans& gold);

// Label phase: the gold label of the top span, or NoLabel. Structural
// phase: the legal actions that keep reachable_count maximal.
std::vector<Action> dynamic_oracle(const ParserState& state, const GoldSpans& gold);

// Builds the tree whose labeled spans are exactly `spans`. Throws
// StructureError on crossing or duplicate spans or a missing root span.
JointTree reconstruct(std::span<const LabeledSpan> spans, std::vector<std::string> tokens);

// Scores for one document, supplied by the model.
class SpanScorer {
 public:
  virtual ~SpanScorer() = default;

  virtual int length() const = 0;
  virtual std::span<const std::string> label_inventory() const = 0;
  // Log-probabilities of {Shift, Combine}; illegal entries are -infinity.
  virtual std::array<double, 2> structural(const ParserState& state) = 0;
  // Log-probabilities over label_inventory() followed by NoLabel.
  virtual std::vector<double> labels(const ParserState& state) = 0;
};

struct DecodeOptions {
  // When set, decoding is constrained to these gold EDUs: shifts push whole
  // EDUs, which stay unlabeled, and only discourse chains label combined spans.
  std::optional<std::vector<EduSpan>> gold_edus;
};

struct DecodeResult {
  JointTree tree;
  std::vector<Action> derivation;
  ParserState final_state;
};

// Greedy decoding: take the best-scoring legal action until terminal.
DecodeResult parse_greedy(SpanScorer& scorer, const std::vector<std::string>& tokens,
                          const DecodeOptions& options = {});

// Label used for EDU wrapper nodes in gold-EDU decoding output.
inline constexpr std::string_view kEduLabel = "EDU";

}  // namespace jointparse
