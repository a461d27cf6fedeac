#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <gtest/gtest.h>

#include "jointparse/joint_format.hpp"
#include "jointparse/model.hpp"
#include "jointparse/synthetic.hpp"
#include "jointparse/transition.hpp"

namespace jointparse {
namespace {

const ModelDims kSmall{6, 5, 7};

struct Fixture {
  std::vector<JointTree> trees = generate_treebank(11, 4);
  Model model{Vocabulary::build(trees), kSmall, 3};
};

double log_sum_exp(const std::vector<double>& values) {
  double max = -INFINITY;
  for (double v : values) max = std::max(max, v);
  double sum = 0.0;
  for (double v : values) sum += std::isfinite(v) ? std::exp(v - max) : 0.0;
  return max + std::log(sum);
}

std::vector<StepTarget> oracle_steps(const JointTree& tree, const Vocabulary& vocabulary) {
  std::vector<StepTarget> steps;
  ParserState state = ParserState::axiom(static_cast<int>(tree.tokens.size()));
  for (const auto& action : static_oracle(tree)) {
    steps.push_back(action.is_structural() ? StepTarget::structural(state, action)
                                           : StepTarget::label(state, action, vocabulary));
    state = apply(state, action);
  }
  return steps;
}

TEST(Vocabulary, ReservedIdsAndUnknownFallback) {
  const auto vocabulary = Vocabulary::build(std::vector<JointTree>{read_joint("(S (NN a) (NN b) (NN a))")});
  EXPECT_EQ(vocabulary.words()[Vocabulary::kUnknown], "<unk>");
  EXPECT_EQ(vocabulary.word_id("zzz"), Vocabulary::kUnknown);
  EXPECT_EQ(vocabulary.count(vocabulary.word_id("a")), 2);
  EXPECT_EQ(vocabulary.labels(), (std::vector<std::string>{"NN", "S"}));
  EXPECT_EQ(vocabulary.no_label_id(), 2);
  EXPECT_EQ(vocabulary.label_id("VP"), -1);
  EXPECT_THROW(Vocabulary::from_lists({"a"}, {1}, {}), std::invalid_argument);
}

TEST(Model, DistributionsAreNormalized) {
  Fixture f;
  const auto& tree = f.trees[0];
  DocumentGraph graph(f.model, f.model.vocabulary().encode(tree.tokens));
  ParserState state = ParserState::axiom(static_cast<int>(tree.tokens.size()));
  for (const auto& action : static_oracle(tree)) {
    if (phase(state) == Phase::Structural) {
      const auto scores = graph.structural(state);
      EXPECT_NEAR(log_sum_exp({scores[0], scores[1]}), 0.0, 1e-9);
    } else {
      EXPECT_NEAR(log_sum_exp(graph.labels(state)), 0.0, 1e-9);
    }
    state = apply(state, action);
  }
}

TEST(Model, RootSpanHasNoNoLabelMass) {
  Fixture f;
  const int n = static_cast<int>(f.trees[0].tokens.size());
  ASSERT_GE(n, 2);
  ParserState state = ParserState::axiom(n);
  state.boundaries = {-1, 0, n};
  state.midpoint = 1;
  DocumentGraph graph(f.model, f.model.vocabulary().encode(f.trees[0].tokens));
  const auto scores = graph.labels(state);
  EXPECT_TRUE(std::isinf(scores.back()) && scores.back() < 0);
  EXPECT_NEAR(log_sum_exp(scores), 0.0, 1e-9);
}

TEST(Model, IllegalStructuralActionIsMasked) {
  Fixture f;
  DocumentGraph graph(f.model, f.model.vocabulary().encode(f.trees[0].tokens));
  const auto scores = graph.structural(ParserState::axiom(static_cast<int>(f.trees[0].tokens.size())));
  EXPECT_DOUBLE_EQ(scores[0], 0.0);
  EXPECT_TRUE(std::isinf(scores[1]));
}

TEST(Model, DeterministicScores) {
  Fixture a;
  Fixture b;
  const auto ids = a.model.vocabulary().encode(a.trees[1].tokens);
  DocumentGraph ga(a.model, ids);
  DocumentGraph gb(b.model, ids);
  EXPECT_EQ(ga.features(), gb.features());
}

TEST(Model, EveryTokenInfluencesEveryBoundary) {
  Fixture f;
  auto ids = f.model.vocabulary().encode(f.trees[0].tokens);
  ASSERT_GE(ids.size(), 3u);
  const Eigen::MatrixXd before = DocumentGraph(f.model, ids).features();
  const int p = static_cast<int>(ids.size()) / 2;
  ids[static_cast<std::size_t>(p)] = ids[static_cast<std::size_t>(p)] == 3 ? 4 : 3;
  const Eigen::MatrixXd after = DocumentGraph(f.model, ids).features();
  ASSERT_EQ(before.cols(), static_cast<Eigen::Index>(ids.size()) + 1);
  EXPECT_EQ(before.rows(), f.model.feature_dim());
  for (Eigen::Index col = 0; col < before.cols(); ++col) {
    EXPECT_GT((before.col(col) - after.col(col)).norm(), 0.0) << "boundary " << col;
  }
}

TEST(Loss, ZeroStepsGiveZeroLossAndGradients) {
  Fixture f;
  const auto result = loss_and_gradients(f.model, f.trees[0].tokens, {});
  EXPECT_EQ(result.loss, 0.0);
  EXPECT_EQ(result.gradients.squared_norm(), 0.0);
}

TEST(Loss, DuplicatingAStepDoublesItsContribution) {
  Fixture f;
  const auto steps = oracle_steps(f.trees[0], f.model.vocabulary());
  const std::vector<StepTarget> one{steps[2]};
  const std::vector<StepTarget> two{steps[2], steps[2]};
  const auto single = loss_and_gradients(f.model, f.trees[0].tokens, one);
  const auto doubled = loss_and_gradients(f.model, f.trees[0].tokens, two);
  EXPECT_NEAR(doubled.loss, 2.0 * single.loss, 1e-12);
  ParameterSet difference = doubled.gradients;
  difference.add(single.gradients, -2.0);
  EXPECT_LT(difference.squared_norm(), 1e-20);
}

TEST(Loss, ReluPatternTracksHiddenUnits) {
  Fixture f;
  const auto steps = oracle_steps(f.trees[0], f.model.vocabulary());
  const auto base = loss_and_gradients(f.model, f.trees[0].tokens, steps);
  ASSERT_FALSE(base.relu_pattern.empty());
  EXPECT_EQ(loss_and_gradients(f.model, f.trees[0].tokens, steps).relu_pattern, base.relu_pattern);
  f.model.parameters()[ParameterSet::kLabelHiddenBias].array() += 100.0;
  const auto shifted = loss_and_gradients(f.model, f.trees[0].tokens, steps);
  EXPECT_EQ(shifted.relu_pattern.size(), base.relu_pattern.size());
  EXPECT_NE(shifted.relu_pattern, base.relu_pattern);
}

TEST(Loss, ImpossibleTargetIsAnError) {
  Fixture f;
  StepTarget step = StepTarget::structural(ParserState::axiom(static_cast<int>(f.trees[0].tokens.size())),
                                           Action::combine());
  EXPECT_THROW(loss_and_gradients(f.model, f.trees[0].tokens, std::vector<StepTarget>{step}), std::runtime_error);
}

TEST(Loss, DropoutChangesLossOnlyWhenActive) {
  Fixture f;
  const auto steps = oracle_steps(f.trees[0], f.model.vocabulary());
  const double clean = loss_and_gradients(f.model, f.trees[0].tokens, steps).loss;
  std::mt19937_64 rng(1);
  const double noisy = loss_and_gradients(f.model, f.trees[0].tokens, steps, {0.5, &rng}).loss;
  EXPECT_NE(clean, noisy);
  EXPECT_EQ(clean, loss_and_gradients(f.model, f.trees[0].tokens, steps, {0.5, nullptr}).loss);
}

TEST(Checkpoint, SaveLoadRoundTrip) {
  Fixture f;
  const auto path = std::filesystem::temp_directory_path() / "jointparse_model_test.ckpt";
  f.model.save(path);
  const Model loaded = Model::load(path);
  EXPECT_EQ(loaded.dims(), f.model.dims());
  EXPECT_EQ(loaded.vocabulary().words(), f.model.vocabulary().words());
  EXPECT_EQ(loaded.vocabulary().labels(), f.model.vocabulary().labels());
  EXPECT_EQ(loaded.vocabulary().counts(), f.model.vocabulary().counts());
  for (int i = 0; i < ParameterSet::kCount; ++i) EXPECT_EQ(loaded.parameters()[i], f.model.parameters()[i]);
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsGarbageAndTruncation) {
  Fixture f;
  const auto path = std::filesystem::temp_directory_path() / "jointparse_bad.ckpt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint";
  }
  EXPECT_THROW(Model::load(path), std::runtime_error);
  f.model.save(path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  EXPECT_THROW(Model::load(path), std::runtime_error);
  std::filesystem::remove(path);
  EXPECT_THROW(Model::load(path), std::runtime_error);
}

TEST(Model, ShapeMismatchIsRejected) {
  Fixture f;
  ParameterSet wrong = f.model.parameters();
  wrong[ParameterSet::kLabelOut].resize(1, 1);
  EXPECT_THROW(Model(f.model.vocabulary(), kSmall, wrong), std::invalid_argument);
}

}  // namespace
}  // namespace jointparse
