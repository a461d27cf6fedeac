#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "jointparse/eval.hpp"
#include "jointparse/model.hpp"
#include "jointparse/transition.hpp"

namespace jointparse {

enum class TrainMode { EndToEnd, GoldEdu };

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // <= 0 disables clipping
};

struct TrainConfig {
  double beta = 0.8;  // probability of following the oracle
  double dropout = 0.5;
  int epochs = 10;
  std::uint64_t seed = 1;
  int dev_size = 30;
  // Singleton training words are replaced by <unk> with this probability.
  double unk_replace = 0.25;
  OptimizerConfig optimizer;
  ModelDims dims;
  TrainMode mode = TrainMode::EndToEnd;
  std::optional<std::filesystem::path> output_dir;  // epoch-<k>.ckpt, best.ckpt

  // Throws std::invalid_argument when a field is out of range.
  void validate(std::size_t treebank_size) const;
};

class Adam {
 public:
  Adam(const ParameterSet& shape, OptimizerConfig config);
  // Clips `grads` to the configured global norm, then updates `params`.
  // Returns the gradient norm before clipping.
  double step(ParameterSet& params, ParameterSet& grads);

 private:
  OptimizerConfig config_;
  ParameterSet first_;
  ParameterSet second_;
  long steps_ = 0;
};

struct RolloutStep {
  std::optional<ParserState> state;  // recorded on request
  std::vector<Action> oracle;
  Action target;
  Action followed;
  StepTarget step;
};

struct RolloutOptions {
  double beta = 0.8;
  bool accumulate = false;     // backpropagate each target into the graph
  bool record_states = false;
};

// Walks from the axiom to a terminal state. At each step the target is the
// oracle action the model currently scores highest; the followed action is
// the target with probability beta, otherwise the model's best legal action.
std::vector<RolloutStep> rollout(DocumentGraph& graph, const JointTree& gold, const Vocabulary& vocabulary,
                                 const RolloutOptions& options, std::mt19937_64& rng);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  DocumentCounts dev;
  double selection_f1 = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  Model best_model;
  int best_epoch = 0;
  std::vector<EpochRecord> history;
  std::vector<JointTree> dev_set;  // empty when dev_size = 0 (selection on the training set)
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// One line per epoch: loss, dev structure/+nuclearity/+relation F1, time.
std::string format_epoch(const EpochRecord& record);

TrainResult train(const std::vector<JointTree>& treebank, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Greedy parse of every document with dropout off.
std::vector<JointTree> parse_documents(const Model& model, const std::vector<JointTree>& gold, TrainMode mode);

DocumentCounts evaluate_model(const Model& model, const std::vector<JointTree>& gold, TrainMode mode);

struct SweepPoint {
  double beta = 0.0;
  double best_dev_f1 = 0.0;
  int best_epoch = 0;
};

std::vector<SweepPoint> beta_sweep(const std::vector<JointTree>& treebank, TrainConfig config,
                                   const std::vector<double>& betas);

}  // namespace jointparse
