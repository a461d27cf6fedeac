#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "jointparse/errors.hpp"
#include "jointparse/joint_format.hpp"
#include "jointparse/spans.hpp"
#include "jointparse/synthetic.hpp"
#include "jointparse/transition.hpp"

namespace jointparse {
namespace {

ParserState make_state(int n, std::vector<int> boundaries, std::optional<int> midpoint) {
  ParserState state = ParserState::axiom(n);
  state.boundaries = std::move(boundaries);
  state.midpoint = midpoint;
  return state;
}

const std::vector<std::string> kInventory{"A", "NP", "S"};

TEST(State, AxiomAndPhases) {
  const auto axiom = ParserState::axiom(3);
  EXPECT_EQ(axiom.boundaries, (std::vector<int>{-1, 0}));
  EXPECT_EQ(phase(axiom), Phase::Structural);
  const auto shifted = apply(axiom, Action::shift());
  EXPECT_EQ(phase(shifted), Phase::Label);
  EXPECT_EQ(phase(apply(shifted, Action::no_label())), Phase::Structural);
}

TEST(LegalActions, AxiomOnlyShifts) {
  EXPECT_EQ(legal_actions(ParserState::axiom(3), kInventory), std::vector<Action>{Action::shift()});
}

TEST(LegalActions, EndOfInputOnlyCombines) {
  EXPECT_EQ(legal_actions(make_state(2, {-1, 0, 1, 2}, std::nullopt), kInventory),
            std::vector<Action>{Action::combine()});
}

TEST(LegalActions, RootSpanCannotStayUnlabeled) {
  const auto actions = legal_actions(make_state(2, {-1, 0, 2}, 1), kInventory);
  EXPECT_EQ(actions.size(), kInventory.size());
  EXPECT_EQ(std::count(actions.begin(), actions.end(), Action::no_label()), 0);
  EXPECT_TRUE(is_legal(make_state(3, {-1, 0, 2}, 1), Action::no_label()));
}

TEST(LegalActions, TerminalStateThrows) {
  const auto terminal = make_state(2, {-1, 0, 2}, std::nullopt);
  EXPECT_TRUE(terminal.is_terminal());
  EXPECT_THROW(legal_actions(terminal, kInventory), std::logic_error);
}

TEST(Apply, ShiftMarksWidthOneSpan) {
  const auto next = apply(ParserState::axiom(3), Action::shift());
  EXPECT_EQ(next.boundaries, (std::vector<int>{-1, 0, 1}));
  EXPECT_EQ(next.midpoint, 0);
}

TEST(Apply, CombineKeepsSplitPoint) {
  const auto next = apply(make_state(2, {-1, 0, 1, 2}, std::nullopt), Action::combine());
  EXPECT_EQ(next.boundaries, (std::vector<int>{-1, 0, 2}));
  EXPECT_EQ(next.midpoint, 1);
}

TEST(Apply, LabelRecordsSpanAndClearsMark) {
  const auto next = apply(make_state(2, {-1, 0, 2}, 1), Action::label("S"), 1.5);
  EXPECT_FALSE(next.midpoint.has_value());
  EXPECT_EQ(next.labeled, (std::vector<LabeledSpan>{{0, 2, "S"}}));
  EXPECT_DOUBLE_EQ(next.score, 1.5);
}

TEST(Apply, IllegalActionThrows) {
  EXPECT_THROW(apply(ParserState::axiom(2), Action::combine()), std::logic_error);
  EXPECT_THROW(apply(ParserState::axiom(2), Action::label("S")), std::logic_error);
}

TEST(Mnemonics, RoundTrip) {
  const std::vector<Action> actions{Action::shift(), Action::no_label(), Action::combine(),
                                    Action::label("S+VP"), Action::label("<-Purpose")};
  EXPECT_EQ(write_derivation(actions), "SH NL CB L:S+VP L:<-Purpose");
  EXPECT_EQ(read_derivation(write_derivation(actions)), actions);
  EXPECT_THROW(parse_mnemonic("XX"), ParseError);
}

TEST(StaticOracle, SingleBinaryBracket) {
  const auto actions = static_oracle(read_joint("(A x y)"));
  EXPECT_EQ(write_derivation(actions), "SH NL SH NL CB L:A");
}

TEST(StaticOracle, ListCombinesLeftToRightWithNoLabelInBetween) {
  const auto tree = read_joint("(<-Elaboration (S a) (List (S b) (S c) (S d)))");
  EXPECT_EQ(write_derivation(static_oracle(tree)),
            "SH L:S SH L:S SH L:S CB NL SH L:S CB L:List CB L:<-Elaboration");
}

TEST(StaticOracle, SyntheticRoundTrip) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto tree = generate_synthetic(seed);
    const auto final_state = replay(static_cast<int>(tree.tokens.size()), static_oracle(tree));
    ASSERT_TRUE(final_state.is_terminal());
    ASSERT_EQ(reconstruct(final_state.labeled, tree.tokens), tree) << "seed " << seed;
  }
}

TEST(Counting, EveryDerivationHasNShiftsAndAlternates) {
  std::mt19937_64 rng(4);
  for (int n = 1; n <= 12; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      ParserState state = ParserState::axiom(n);
      int shifts = 0, combines = 0, label_steps = 0;
      Phase expected = Phase::Structural;
      while (!state.is_terminal()) {
        ASSERT_EQ(phase(state), expected);
        const auto actions = legal_actions(state, kInventory);
        const Action action = actions[std::uniform_int_distribution<std::size_t>(0, actions.size() - 1)(rng)];
        shifts += action.kind == Action::Kind::Shift;
        combines += action.kind == Action::Kind::Combine;
        label_steps += !action.is_structural();
        state = apply(state, action);
        expected = expected == Phase::Structural ? Phase::Label : Phase::Structural;
      }
      EXPECT_EQ(shifts, n);
      EXPECT_EQ(combines, n - 1);
      EXPECT_EQ(label_steps, 2 * n - 1);
      EXPECT_TRUE(is_laminar(state.labeled));
      EXPECT_NO_THROW(reconstruct(state.labeled, std::vector<std::string>(static_cast<std::size_t>(n), "w")));
    }
  }
}

TEST(ReachableCount, AxiomReachesEverything) {
  const auto tree = generate_synthetic(3);
  const GoldSpans gold(tree);
  EXPECT_EQ(reachable_count(ParserState::axiom(static_cast<int>(tree.tokens.size())), gold),
            static_cast<int>(gold.size()));
}

TEST(ReachableCount, DroppedBoundaryLosesSpan) {
  const GoldSpans gold(std::vector<LabeledSpan>{{2, 4, "NP"}, {0, 4, "S"}});
  // Boundary 2 was merged away: (0,3) was built, so (2,4) can no longer form.
  const auto state = make_state(4, {-1, 0, 3}, std::nullopt);
  EXPECT_EQ(reachable_count(state, gold), 1);
}

TEST(DynamicOracle, LabelPhase) {
  const GoldSpans gold(std::vector<LabeledSpan>{{0, 2, "S+VP"}, {0, 3, "A"}});
  EXPECT_EQ(dynamic_oracle(make_state(3, {-1, 0, 2}, 1), gold), std::vector<Action>{Action::label("S+VP")});
  EXPECT_EQ(dynamic_oracle(make_state(3, {-1, 0, 1}, 0), gold), std::vector<Action>{Action::no_label()});
}

TEST(DynamicOracle, FollowingItFromTheAxiomRecoversGold) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto tree = generate_synthetic(seed);
    const GoldSpans gold(tree);
    ParserState state = ParserState::axiom(static_cast<int>(tree.tokens.size()));
    while (!state.is_terminal()) state = apply(state, dynamic_oracle(state, gold).front());
    ASSERT_EQ(reconstruct(state.labeled, tree.tokens), tree) << "seed " << seed;
  }
}

TEST(Reconstruct, SmallCases) {
  EXPECT_EQ(write_joint(reconstruct(std::vector<LabeledSpan>{{0, 2, "A"}}, {"x", "y"})), "(A x y)");
  EXPECT_EQ(write_joint(reconstruct(std::vector<LabeledSpan>{{0, 1, "B"}, {0, 2, "A"}}, {"x", "y"})),
            "(A (B x) y)");
  EXPECT_EQ(write_joint(reconstruct(std::vector<LabeledSpan>{{0, 2, "S+VP"}}, {"x", "y"})), "(S (VP x y))");
}

TEST(Reconstruct, CrossingOrRootlessSpansThrow) {
  EXPECT_THROW(reconstruct(std::vector<LabeledSpan>{{0, 2, "A"}, {1, 3, "B"}, {0, 3, "S"}}, {"x", "y", "z"}),
               StructureError);
  EXPECT_THROW(reconstruct(std::vector<LabeledSpan>{{0, 1, "A"}}, {"x", "y"}), StructureError);
}

// Scores every action by a fixed table so decoding is predictable.
class TableScorer : public SpanScorer {
 public:
  TableScorer(int n, std::vector<std::string> labels) : n_(n), labels_(std::move(labels)) {}
  int length() const override { return n_; }
  std::span<const std::string> label_inventory() const override { return labels_; }
  std::array<double, 2> structural(const ParserState& state) override {
    // Prefer shifting whenever possible.
    return {can_shift(state) ? -0.1 : -INFINITY, can_combine(state) ? -2.0 : -INFINITY};
  }
  std::vector<double> labels(const ParserState&) override {
    std::vector<double> out(labels_.size() + 1, -5.0);
    out.back() = -0.5;  // NoLabel
    out[0] = -1.0;
    return out;
  }

 private:
  int n_;
  std::vector<std::string> labels_;
};

TEST(Greedy, EndToEndCountsAndAlternation) {
  TableScorer scorer(5, {"S", "NP", "Elaboration->"});
  const std::vector<std::string> tokens{"a", "b", "c", "d", "e"};
  const auto result = parse_greedy(scorer, tokens);
  const auto& derivation = result.derivation;
  EXPECT_EQ(std::count(derivation.begin(), derivation.end(), Action::shift()), 5);
  EXPECT_EQ(std::count(derivation.begin(), derivation.end(), Action::combine()), 4);
  EXPECT_EQ(derivation.size(), 18u);
  for (std::size_t i = 0; i < derivation.size(); ++i) EXPECT_EQ(derivation[i].is_structural(), i % 2 == 0);
  EXPECT_EQ(result.tree.tokens, tokens);
  EXPECT_EQ(extent(result.tree.root), (Span{0, 5}));
}

TEST(Greedy, GoldEduModeUsesMacroShiftsAndDiscourseLabels) {
  TableScorer scorer(6, {"S", "Elaboration->", "List"});
  const std::vector<std::string> tokens{"a", "b", "c", "d", "e", "f"};
  DecodeOptions options;
  options.gold_edus = std::vector<EduSpan>{{0, 2}, {2, 5}, {5, 6}};
  const auto result = parse_greedy(scorer, tokens, options);
  const auto& derivation = result.derivation;
  EXPECT_EQ(std::count(derivation.begin(), derivation.end(), Action::shift()), 3);
  EXPECT_EQ(std::count(derivation.begin(), derivation.end(), Action::combine()), 2);
  for (const auto& action : derivation) {
    if (action.kind == Action::Kind::Label) EXPECT_TRUE(chain_is_discourse(action.chain)) << action.chain;
  }
  EXPECT_EQ(extract_edus(result.tree), *options.gold_edus);
}

TEST(Greedy, GoldEduModeSingleEdu) {
  TableScorer scorer(3, {"S", "List"});
  DecodeOptions options;
  options.gold_edus = std::vector<EduSpan>{{0, 3}};
  const auto result = parse_greedy(scorer, {"a", "b", "c"}, options);
  EXPECT_EQ(write_joint(result.tree), "(EDU a b c)");
}

}  // namespace
}  // namespace jointparse
