#include <algorithm>
#include <filesystem>

#include <gtest/gtest.h>

#include "jointparse/spans.hpp"
#include "jointparse/synthetic.hpp"
#include "jointparse/trainer.hpp"

namespace jointparse {
namespace {

const ModelDims kSmall{6, 5, 7};

std::vector<JointTree> small_treebank(int count) {
  SyntheticParams params;
  params.max_tokens = 12;
  params.max_edus = 3;
  return generate_treebank(21, count, params);
}

TEST(TrainConfig, RejectsOutOfRangeValues) {
  TrainConfig config;
  EXPECT_NO_THROW(config.validate(40));
  EXPECT_THROW(config.validate(30), std::invalid_argument);  // dev_size must be smaller
  config.dev_size = 0;
  EXPECT_THROW(config.validate(0), std::invalid_argument);
  config.beta = 1.5;
  EXPECT_THROW(config.validate(5), std::invalid_argument);
  config.beta = 0.8;
  config.dropout = 1.0;
  EXPECT_THROW(config.validate(5), std::invalid_argument);
  config.dropout = 0.5;
  config.epochs = 0;
  EXPECT_THROW(config.validate(5), std::invalid_argument);
}

TEST(Rollout, BetaOneReproducesGold) {
  const auto trees = small_treebank(3);
  const Model model(Vocabulary::build(trees), kSmall, 1);
  std::mt19937_64 rng(2);
  for (const auto& tree : trees) {
    DocumentGraph graph(model, model.vocabulary().encode(tree.tokens));
    RolloutOptions options;
    options.beta = 1.0;
    options.record_states = true;
    const auto steps = rollout(graph, tree, model.vocabulary(), options, rng);
    ParserState state = *steps.front().state;
    for (const auto& step : steps) state = apply(state, step.followed);
    EXPECT_EQ(reconstruct(state.labeled, tree.tokens), tree);
  }
}

TEST(Rollout, TargetsAreLegalOracleActions) {
  const auto trees = small_treebank(4);
  const Model model(Vocabulary::build(trees), kSmall, 1);
  std::mt19937_64 rng(3);
  const std::span<const std::string> inventory = model.vocabulary().labels();
  for (double beta : {0.0, 0.5}) {
    for (const auto& tree : trees) {
      DocumentGraph graph(model, model.vocabulary().encode(tree.tokens));
      RolloutOptions options;
      options.beta = beta;
      options.record_states = true;
      for (const auto& step : rollout(graph, tree, model.vocabulary(), options, rng)) {
        const auto legal = legal_actions(*step.state, inventory);
        EXPECT_NE(std::find(legal.begin(), legal.end(), step.target), legal.end());
        EXPECT_NE(std::find(step.oracle.begin(), step.oracle.end(), step.target), step.oracle.end());
        EXPECT_NE(std::find(legal.begin(), legal.end(), step.followed), legal.end());
      }
    }
  }
}

TEST(Rollout, BetaZeroFollowsGreedyDecoding) {
  const auto trees = small_treebank(3);
  const Model model(Vocabulary::build(trees), kSmall, 5);
  std::mt19937_64 rng(4);
  for (const auto& tree : trees) {
    DocumentGraph graph(model, model.vocabulary().encode(tree.tokens));
    RolloutOptions options;
    options.beta = 0.0;
    std::vector<Action> followed;
    for (const auto& step : rollout(graph, tree, model.vocabulary(), options, rng)) followed.push_back(step.followed);
    DocumentGraph fresh(model, model.vocabulary().encode(tree.tokens));
    EXPECT_EQ(followed, parse_greedy(fresh, tree.tokens).derivation);
  }
}

TEST(Rollout, SameSeedSameTrajectory) {
  const auto trees = small_treebank(2);
  const Model model(Vocabulary::build(trees), kSmall, 1);
  auto run = [&] {
    std::mt19937_64 rng(99);
    DocumentGraph graph(model, model.vocabulary().encode(trees[1].tokens));
    RolloutOptions options;
    options.beta = 0.5;
    std::vector<Action> out;
    for (const auto& step : rollout(graph, trees[1], model.vocabulary(), options, rng)) out.push_back(step.followed);
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Adam, ClipsAndMovesAgainstTheGradient) {
  const auto trees = small_treebank(1);
  Model model(Vocabulary::build(trees), kSmall, 1);
  ParameterSet grads = model.parameters().zeros_like();
  grads[ParameterSet::kShiftOutBias].setConstant(100.0);
  const ParameterSet before = model.parameters();
  OptimizerConfig config;
  Adam adam(model.parameters(), config);
  const double norm = adam.step(model.parameters(), grads);
  EXPECT_GT(norm, config.clip_norm);
  EXPECT_NEAR(std::sqrt(grads.squared_norm()), config.clip_norm, 1e-9);
  const Eigen::MatrixXd moved = model.parameters()[ParameterSet::kShiftOutBias] - before[ParameterSet::kShiftOutBias];
  EXPECT_TRUE((moved.array() < 0.0).all());
  EXPECT_NEAR(moved.maxCoeff(), -config.learning_rate, 1e-6);
  EXPECT_EQ(model.parameters()[ParameterSet::kEmbedding], before[ParameterSet::kEmbedding]);
}

TEST(Train, SeededRunsAreIdenticalAndWriteCheckpoints) {
  const auto trees = small_treebank(6);
  TrainConfig config;
  config.dims = kSmall;
  config.epochs = 2;
  config.dev_size = 2;
  config.seed = 8;
  const auto dir = std::filesystem::temp_directory_path() / "jointparse_train_test";
  std::filesystem::remove_all(dir);
  config.output_dir = dir;
  std::vector<std::string> lines;
  const auto first = train(trees, config, [&](const EpochRecord& record) { lines.push_back(format_epoch(record)); });
  config.output_dir.reset();
  const auto second = train(trees, config);
  EXPECT_EQ(first.history.size(), 2u);
  EXPECT_EQ(first.dev_set.size(), 2u);
  for (int i = 0; i < ParameterSet::kCount; ++i) {
    EXPECT_EQ(first.best_model.parameters()[i], second.best_model.parameters()[i]);
  }
  EXPECT_EQ(first.history[1].loss, second.history[1].loss);
  EXPECT_TRUE(std::filesystem::exists(dir / "epoch-1.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "epoch-2.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "best.ckpt"));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_NE(lines[0].find("epoch 1 loss"), std::string::npos);
  EXPECT_NE(lines[0].find("struct"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Train, BestEpochHasMaximalSelectionScore) {
  const auto trees = small_treebank(5);
  TrainConfig config;
  config.dims = kSmall;
  config.epochs = 4;
  config.dev_size = 0;
  const auto result = train(trees, config);
  double best = -1.0;
  for (const auto& record : result.history) best = std::max(best, record.selection_f1);
  EXPECT_EQ(result.history[static_cast<std::size_t>(result.best_epoch - 1)].selection_f1, best);
}

TEST(Train, GoldEduModeKeepsGoldSegmentation) {
  const auto trees = small_treebank(4);
  TrainConfig config;
  config.dims = kSmall;
  config.epochs = 1;
  config.dev_size = 0;
  config.mode = TrainMode::GoldEdu;
  const auto result = train(trees, config);
  const auto parsed = parse_documents(result.best_model, trees, TrainMode::GoldEdu);
  for (std::size_t i = 0; i < trees.size(); ++i) EXPECT_EQ(extract_edus(parsed[i]), extract_edus(trees[i]));
}

TEST(BetaSweep, ReportsOnePointPerBeta) {
  const auto trees = small_treebank(5);
  TrainConfig config;
  config.dims = kSmall;
  config.epochs = 1;
  config.dev_size = 2;
  const auto points = beta_sweep(trees, config, {0.6, 0.8, 1.0});
  ASSERT_EQ(points.size(), 3u);
  EXPECT_EQ(points[1].beta, 0.8);
  for (const auto& point : points) {
    EXPECT_GE(point.best_dev_f1, 0.0);
    EXPECT_LE(point.best_dev_f1, 1.0);
  }
}

}  // namespace
}  // namespace jointparse
