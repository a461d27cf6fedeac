#include <gtest/gtest.h>

#include "jointparse/joint_format.hpp"
#include "jointparse/model.hpp"
#include "jointparse/verify.hpp"

namespace jointparse::verify {
namespace {

TEST(CompletionSearch, AxiomBestIsAllGold) {
  const auto tree = read_joint("(S (NP a b) (VP c))");
  CompletionSearch search(GoldSpans(tree), {"NP", "S", "VP", "X"});
  EXPECT_EQ(search.best_final_count(ParserState::axiom(3)), 3);
  EXPECT_EQ(search.best_future(ParserState::axiom(3)), std::make_pair(3, 0));
}

TEST(CompletionSearch, WrongMergeLosesExactlyTheCrossedSpan) {
  const auto tree = read_joint("(S (NP a b) (VP c))");
  CompletionSearch search(GoldSpans(tree), {"NP", "S", "VP+X"});
  ParserState state = ParserState::axiom(3);
  for (const auto& action : {Action::shift(), Action::no_label(), Action::shift(), Action::no_label()}) {
    state = apply(state, action);
  }
  // Shifting c before combining a b keeps NP reachable; combining b c would not.
  EXPECT_EQ(search.optimal_actions(state), std::vector<Action>{Action::combine()});
}

TEST(CompletionSearch, NonGoldSpanPrefersNoLabel) {
  const auto tree = read_joint("(S a b c)");
  CompletionSearch search(GoldSpans(tree), {"S", "NP"});
  const auto shifted = apply(ParserState::axiom(3), Action::shift());
  EXPECT_EQ(search.optimal_actions(shifted), std::vector<Action>{Action::no_label()});
}

TEST(RelativeError, ScaleFloor) {
  EXPECT_DOUBLE_EQ(relative_error(1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(2.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(relative_error(1e-9, 0.0), 1e-3);
}

TEST(OracleCheck, SmallRunPasses) {
  const auto report = check_dynamic_oracle(5, 200, 5);
  EXPECT_GE(report.states, 200);
  EXPECT_TRUE(report.ok()) << (report.examples.empty() ? "" : report.examples.front());
}

TEST(Gradcheck, SmallRunPasses) {
  GradcheckOptions options;
  options.documents = 1;
  options.slices_per_document = ParameterSet::kCount;
  options.coordinates_per_slice = 3;
  const auto report = check_gradients(9, options);
  EXPECT_EQ(report.slices, ParameterSet::kCount);
  EXPECT_TRUE(report.ok()) << (report.examples.empty() ? "" : report.examples.front());
}

}  // namespace
}  // namespace jointparse::verify
