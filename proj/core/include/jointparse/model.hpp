#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "jointparse/transition.hpp"
#include "jointparse/tree.hpp"

namespace jointparse {

class Vocabulary {
 public:
  static constexpr int kUnknown = 0;
  static constexpr int kBegin = 1;
  static constexpr int kEnd = 2;

  Vocabulary();
  static Vocabulary build(std::span<const JointTree> treebank);
  static Vocabulary from_lists(std::vector<std::string> words, std::vector<int> counts,
                               std::vector<std::string> labels);

  int word_id(std::string_view word) const;
  int count(int word_id) const { return counts_.at(word_id); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<int>& counts() const { return counts_; }

  // Label chains; index labels().size() stands for NoLabel.
  const std::vector<std::string>& labels() const { return labels_; }
  int label_id(std::string_view chain) const;  // -1 when absent
  int no_label_id() const { return static_cast<int>(labels_.size()); }

  std::vector<int> encode(std::span<const std::string> tokens) const;

 private:
  std::vector<std::string> words_;
  std::vector<int> counts_;
  std::unordered_map<std::string, int> word_ids_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> label_ids_;
};

struct ModelDims {
  int word_dim = 50;
  int hidden_dim = 200;  // per direction per layer
  int mlp_dim = 200;

  bool operator==(const ModelDims&) const = default;
};

// Every trainable array, addressed by index. Gradients share the layout.
class ParameterSet {
 public:
  enum Index : int {
    kEmbedding,
    // layer 0 forward / backward, layer 1 forward / backward
    kLstmInput0F, kLstmRecurrent0F, kLstmBias0F,
    kLstmInput0B, kLstmRecurrent0B, kLstmBias0B,
    kLstmInput1F, kLstmRecurrent1F, kLstmBias1F,
    kLstmInput1B, kLstmRecurrent1B, kLstmBias1B,
    kShiftHidden, kShiftHiddenBias, kShiftOut, kShiftOutBias,
    kCombineHidden, kCombineHiddenBias, kCombineOut, kCombineOutBias,
    kLabelHidden, kLabelHiddenBias, kLabelOut, kLabelOutBias,
    kCount
  };

  ParameterSet() = default;
  ParameterSet(const ModelDims& dims, int vocabulary_size, int label_outputs);

  Eigen::MatrixXd& operator[](int index) { return tensors_[static_cast<std::size_t>(index)]; }
  const Eigen::MatrixXd& operator[](int index) const { return tensors_[static_cast<std::size_t>(index)]; }
  std::size_t size() const { return tensors_.size(); }

  static std::string_view name(int index);

  ParameterSet zeros_like() const;
  void set_zero();
  double squared_norm() const;
  void scale(double factor);
  void add(const ParameterSet& other, double factor = 1.0);
  bool all_finite() const;

 private:
  std::vector<Eigen::MatrixXd> tensors_;
};

class Model {
 public:
  Model(Vocabulary vocabulary, ModelDims dims, std::uint64_t seed);
  Model(Vocabulary vocabulary, ModelDims dims, ParameterSet parameters);

  const Vocabulary& vocabulary() const { return vocabulary_; }
  const ModelDims& dims() const { return dims_; }
  ParameterSet& parameters() { return parameters_; }
  const ParameterSet& parameters() const { return parameters_; }

  int feature_dim() const { return 4 * dims_.hidden_dim; }

  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);

 private:
  Vocabulary vocabulary_;
  ModelDims dims_;
  ParameterSet parameters_;
};

// What a single training step needs from its parser state.
struct StepTarget {
  enum class Kind { Structural, Label };

  Kind kind = Kind::Structural;
  // Structural: (a', a, b) with top span (a, b) and a' the left boundary of
  // the span below (-1 when combine is illegal). Label: (i, k, j).
  int left = 0;
  int mid = 0;
  int right = 0;
  bool shift_legal = false;
  bool combine_legal = false;
  bool no_label_legal = false;
  // Structural: 0 = Shift, 1 = Combine. Label: vocabulary label id or
  // no_label_id().
  int target = 0;

  static StepTarget structural(const ParserState& state, const Action& target);
  static StepTarget label(const ParserState& state, const Action& target, const Vocabulary& vocabulary);
};

struct DropoutConfig {
  double rate = 0.0;
  std::mt19937_64* rng = nullptr;  // dropout is active iff rate > 0 and rng set

  bool active() const { return rate > 0.0 && rng != nullptr; }
};

// Forward computation over one document plus the caches needed to
// backpropagate any sequence of step losses into parameter gradients.
class DocumentGraph : public SpanScorer {
 public:
  DocumentGraph(const Model& model, std::vector<int> word_ids, DropoutConfig dropout = {});
  ~DocumentGraph() override;
  DocumentGraph(const DocumentGraph&) = delete;
  DocumentGraph& operator=(const DocumentGraph&) = delete;

  // SpanScorer
  int length() const override;
  std::span<const std::string> label_inventory() const override;
  std::array<double, 2> structural(const ParserState& state) override;
  std::vector<double> labels(const ParserState& state) override;

  std::array<double, 2> structural(const StepTarget& step);
  std::vector<double> labels(const StepTarget& step);

  // Adds -log p(target) of the most recent structural()/labels() call that
  // matches `step` to the loss and its gradient to the accumulators.
  // Throws std::runtime_error when the target's probability is zero.
  double backward_step(const StepTarget& step);

  // Pushes accumulated feature gradients through the encoder into `grads`.
  void backward(ParameterSet& grads);

  double loss() const { return loss_; }

  // On/off state of every hidden-layer ReLU evaluated so far, in order.
  const std::vector<bool>& relu_pattern() const;

  // Boundary features, feature_dim() x (n + 1).
  const Eigen::MatrixXd& features() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double loss_ = 0.0;
};

struct LossAndGradients {
  double loss = 0.0;
  ParameterSet gradients;
  // The loss is differentiable in a neighbourhood where this pattern holds.
  std::vector<bool> relu_pattern;
};

// Sum over steps of -log p(target), with exact gradients. Dropout is off
// unless `dropout` is active.
LossAndGradients loss_and_gradients(const Model& model, std::span<const std::string> tokens,
                                    std::span<const StepTarget> steps, DropoutConfig dropout = {});

}  // namespace jointparse
