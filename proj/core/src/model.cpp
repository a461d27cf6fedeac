#include "jointparse/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "jointparse/spans.hpp"

namespace jointparse {

// ---------------------------------------------------------------- vocabulary

Vocabulary::Vocabulary() : words_{"<unk>", "<s>", "</s>"}, counts_{0, 0, 0} {
  for (std::size_t i = 0; i < words_.size(); ++i) word_ids_.emplace(words_[i], static_cast<int>(i));
}

Vocabulary Vocabulary::from_lists(std::vector<std::string> words, std::vector<int> counts,
                                  std::vector<std::string> labels) {
  if (words.size() < 3 || words[kUnknown] != "<unk>" || words[kBegin] != "<s>" || words[kEnd] != "</s>") {
    throw std::invalid_argument("vocabulary must start with <unk>, <s>, </s>");
  }
  if (counts.size() != words.size()) throw std::invalid_argument("vocabulary counts do not match words");
  Vocabulary vocabulary;
  vocabulary.words_ = std::move(words);
  vocabulary.counts_ = std::move(counts);
  vocabulary.labels_ = std::move(labels);
  vocabulary.word_ids_.clear();
  vocabulary.label_ids_.clear();
  for (std::size_t i = 0; i < vocabulary.words_.size(); ++i) {
    if (!vocabulary.word_ids_.emplace(vocabulary.words_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate vocabulary word '" + vocabulary.words_[i] + "'");
    }
  }
  for (std::size_t i = 0; i < vocabulary.labels_.size(); ++i) {
    if (!vocabulary.label_ids_.emplace(vocabulary.labels_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate label chain '" + vocabulary.labels_[i] + "'");
    }
  }
  return vocabulary;
}

Vocabulary Vocabulary::build(std::span<const JointTree> treebank) {
  std::map<std::string, int> word_counts;
  std::map<std::string, int> chains;
  for (const auto& tree : treebank) {
    for (const auto& token : tree.tokens) ++word_counts[token];
    for (const auto& span : labeled_spans(tree)) ++chains[span.chain];
  }
  std::vector<std::string> words{"<unk>", "<s>", "</s>"};
  std::vector<int> counts{0, 0, 0};
  for (const auto& [word, count] : word_counts) {
    if (word == "<unk>" || word == "<s>" || word == "</s>") continue;
    words.push_back(word);
    counts.push_back(count);
  }
  std::vector<std::string> labels;
  for (const auto& entry : chains) labels.push_back(entry.first);
  return from_lists(std::move(words), std::move(counts), std::move(labels));
}

int Vocabulary::word_id(std::string_view word) const {
  const auto it = word_ids_.find(std::string(word));
  return it == word_ids_.end() ? kUnknown : it->second;
}

int Vocabulary::label_id(std::string_view chain) const {
  const auto it = label_ids_.find(std::string(chain));
  return it == label_ids_.end() ? -1 : it->second;
}

std::vector<int> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& token : tokens) ids.push_back(word_id(token));
  return ids;
}

// ------------------------------------------------------------- parameters

namespace {

constexpr std::array<std::string_view, ParameterSet::kCount> kNames{
    "embedding",
    "lstm0f.input", "lstm0f.recurrent", "lstm0f.bias",
    "lstm0b.input", "lstm0b.recurrent", "lstm0b.bias",
    "lstm1f.input", "lstm1f.recurrent", "lstm1f.bias",
    "lstm1b.input", "lstm1b.recurrent", "lstm1b.bias",
    "shift.hidden", "shift.hidden_bias", "shift.out", "shift.out_bias",
    "combine.hidden", "combine.hidden_bias", "combine.out", "combine.out_bias",
    "label.hidden", "label.hidden_bias", "label.out", "label.out_bias",
};

}  // namespace

ParameterSet::ParameterSet(const ModelDims& dims, int vocabulary_size, int label_outputs) {
  const int h = dims.hidden_dim;
  const int feature = 4 * h;
  const int m = dims.mlp_dim;
  tensors_.resize(kCount);
  tensors_[kEmbedding] = Eigen::MatrixXd::Zero(dims.word_dim, vocabulary_size);
  for (int layer = 0; layer < 2; ++layer) {
    const int input = layer == 0 ? dims.word_dim : 2 * h;
    for (int direction = 0; direction < 2; ++direction) {
      const int base = kLstmInput0F + 6 * layer + 3 * direction;
      tensors_[base] = Eigen::MatrixXd::Zero(4 * h, input);
      tensors_[base + 1] = Eigen::MatrixXd::Zero(4 * h, h);
      tensors_[base + 2] = Eigen::MatrixXd::Zero(4 * h, 1);
    }
  }
  tensors_[kShiftHidden] = Eigen::MatrixXd::Zero(m, 2 * feature);
  tensors_[kShiftHiddenBias] = Eigen::MatrixXd::Zero(m, 1);
  tensors_[kShiftOut] = Eigen::MatrixXd::Zero(1, m);
  tensors_[kShiftOutBias] = Eigen::MatrixXd::Zero(1, 1);
  tensors_[kCombineHidden] = Eigen::MatrixXd::Zero(m, 3 * feature);
  tensors_[kCombineHiddenBias] = Eigen::MatrixXd::Zero(m, 1);
  tensors_[kCombineOut] = Eigen::MatrixXd::Zero(1, m);
  tensors_[kCombineOutBias] = Eigen::MatrixXd::Zero(1, 1);
  tensors_[kLabelHidden] = Eigen::MatrixXd::Zero(m, 3 * feature);
  tensors_[kLabelHiddenBias] = Eigen::MatrixXd::Zero(m, 1);
  tensors_[kLabelOut] = Eigen::MatrixXd::Zero(label_outputs, m);
  tensors_[kLabelOutBias] = Eigen::MatrixXd::Zero(label_outputs, 1);
}

std::string_view ParameterSet::name(int index) { return kNames.at(static_cast<std::size_t>(index)); }

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  out.tensors_.reserve(tensors_.size());
  for (const auto& t : tensors_) out.tensors_.push_back(Eigen::MatrixXd::Zero(t.rows(), t.cols()));
  return out;
}

void ParameterSet::set_zero() {
  for (auto& t : tensors_) t.setZero();
}

double ParameterSet::squared_norm() const {
  double total = 0.0;
  for (const auto& t : tensors_) total += t.squaredNorm();
  return total;
}

void ParameterSet::scale(double factor) {
  for (auto& t : tensors_) t *= factor;
}

void ParameterSet::add(const ParameterSet& other, double factor) {
  for (std::size_t i = 0; i < tensors_.size(); ++i) tensors_[i] += factor * other.tensors_[i];
}

bool ParameterSet::all_finite() const {
  return std::all_of(tensors_.begin(), tensors_.end(), [](const Eigen::MatrixXd& t) { return t.allFinite(); });
}

// ------------------------------------------------------------------ model

Model::Model(Vocabulary vocabulary, ModelDims dims, std::uint64_t seed)
    : vocabulary_(std::move(vocabulary)),
      dims_(dims),
      parameters_(dims, static_cast<int>(vocabulary_.words().size()), vocabulary_.no_label_id() + 1) {
  if (dims.word_dim < 1 || dims.hidden_dim < 1 || dims.mlp_dim < 1) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  auto fill = [&](Eigen::MatrixXd& t, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      for (Eigen::Index r = 0; r < t.rows(); ++r) t(r, c) = dist(rng);
    }
  };
  auto glorot = [&](Eigen::MatrixXd& t) { fill(t, std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()))); };

  fill(parameters_[ParameterSet::kEmbedding], 0.1);
  const int h = dims.hidden_dim;
  for (int base = ParameterSet::kLstmInput0F; base < ParameterSet::kShiftHidden; base += 3) {
    glorot(parameters_[base]);
    glorot(parameters_[base + 1]);
    parameters_[base + 2].block(h, 0, h, 1).setOnes();  // forget gate
  }
  for (int index : {ParameterSet::kShiftHidden, ParameterSet::kShiftOut, ParameterSet::kCombineHidden,
                    ParameterSet::kCombineOut, ParameterSet::kLabelHidden, ParameterSet::kLabelOut}) {
    glorot(parameters_[index]);
  }
}

Model::Model(Vocabulary vocabulary, ModelDims dims, ParameterSet parameters)
    : vocabulary_(std::move(vocabulary)), dims_(dims), parameters_(std::move(parameters)) {
  const ParameterSet expected(dims, static_cast<int>(vocabulary_.words().size()), vocabulary_.no_label_id() + 1);
  if (parameters_.size() != expected.size()) throw std::invalid_argument("parameter set has the wrong arity");
  for (int i = 0; i < ParameterSet::kCount; ++i) {
    if (parameters_[i].rows() != expected[i].rows() || parameters_[i].cols() != expected[i].cols()) {
      throw std::invalid_argument("parameter '" + std::string(ParameterSet::name(i)) + "' has shape " +
                                  std::to_string(parameters_[i].rows()) + "x" + std::to_string(parameters_[i].cols()) +
                                  ", expected " + std::to_string(expected[i].rows()) + "x" +
                                  std::to_string(expected[i].cols()));
    }
  }
}

// ------------------------------------------------------------- step targets

StepTarget StepTarget::structural(const ParserState& state, const Action& target) {
  StepTarget step;
  step.kind = Kind::Structural;
  const Span top = state.top();
  step.left = state.boundaries.size() >= 4 ? state.boundaries[state.boundaries.size() - 3] : -1;
  step.mid = top.begin;
  step.right = top.end;
  step.shift_legal = can_shift(state);
  step.combine_legal = can_combine(state);
  step.target = target.kind == Action::Kind::Combine ? 1 : 0;
  return step;
}

StepTarget StepTarget::label(const ParserState& state, const Action& target, const Vocabulary& vocabulary) {
  StepTarget step;
  step.kind = Kind::Label;
  const Span top = state.top();
  step.left = top.begin;
  step.mid = state.midpoint.value_or(top.begin);
  step.right = top.end;
  step.no_label_legal = can_skip_label(state);
  if (target.kind == Action::Kind::Label) {
    step.target = vocabulary.label_id(target.chain);
    if (step.target < 0) throw std::invalid_argument("label chain '" + target.chain + "' is not in the vocabulary");
  } else {
    step.target = vocabulary.no_label_id();
  }
  return step;
}

// ------------------------------------------------------------------ graph

namespace {

constexpr double kMinusInfinity = -std::numeric_limits<double>::infinity();

struct LstmCache {
  bool reverse = false;
  Eigen::MatrixXd input;   // in x T
  Eigen::MatrixXd gates;   // 4h x T, activated (i, f, o, g)
  Eigen::MatrixXd cells;   // h x T
  Eigen::MatrixXd hidden;  // h x T
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LstmCache run_lstm(const Eigen::MatrixXd& input_weights, const Eigen::MatrixXd& recurrent_weights,
                   const Eigen::MatrixXd& bias, Eigen::MatrixXd input, bool reverse) {
  const Eigen::Index h = recurrent_weights.cols();
  const Eigen::Index steps = input.cols();
  LstmCache cache;
  cache.reverse = reverse;
  cache.gates = input_weights * input;
  cache.gates.colwise() += bias.col(0);
  cache.cells.resize(h, steps);
  cache.hidden.resize(h, steps);
  Eigen::VectorXd previous_hidden = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd previous_cell = Eigen::VectorXd::Zero(h);
  for (Eigen::Index s = 0; s < steps; ++s) {
    const Eigen::Index t = reverse ? steps - 1 - s : s;
    Eigen::VectorXd z = cache.gates.col(t) + recurrent_weights * previous_hidden;
    for (Eigen::Index r = 0; r < 3 * h; ++r) z(r) = sigmoid(z(r));
    for (Eigen::Index r = 3 * h; r < 4 * h; ++r) z(r) = std::tanh(z(r));
    cache.gates.col(t) = z;
    const auto i = z.segment(0, h).array();
    const auto f = z.segment(h, h).array();
    const auto o = z.segment(2 * h, h).array();
    const auto g = z.segment(3 * h, h).array();
    cache.cells.col(t) = f * previous_cell.array() + i * g;
    cache.hidden.col(t) = o * cache.cells.col(t).array().tanh();
    previous_hidden = cache.hidden.col(t);
    previous_cell = cache.cells.col(t);
  }
  cache.input = std::move(input);
  return cache;
}

// Returns the gradient with respect to the input sequence.
Eigen::MatrixXd backprop_lstm(const LstmCache& cache, const Eigen::MatrixXd& hidden_grad,
                              const Eigen::MatrixXd& input_weights, const Eigen::MatrixXd& recurrent_weights,
                              Eigen::MatrixXd& input_weights_grad, Eigen::MatrixXd& recurrent_weights_grad,
                              Eigen::MatrixXd& bias_grad) {
  const Eigen::Index h = recurrent_weights.cols();
  const Eigen::Index steps = cache.hidden.cols();
  Eigen::MatrixXd gate_grad(4 * h, steps);
  Eigen::VectorXd next_hidden_grad = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd next_cell_grad = Eigen::VectorXd::Zero(h);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(h);
  for (Eigen::Index s = steps - 1; s >= 0; --s) {
    const Eigen::Index t = cache.reverse ? steps - 1 - s : s;
    const bool first = s == 0;
    const Eigen::Index prev = cache.reverse ? t + 1 : t - 1;
    const Eigen::ArrayXd previous_cell = first ? Eigen::ArrayXd(zero) : Eigen::ArrayXd(cache.cells.col(prev));
    const auto i = cache.gates.col(t).segment(0, h).array();
    const auto f = cache.gates.col(t).segment(h, h).array();
    const auto o = cache.gates.col(t).segment(2 * h, h).array();
    const auto g = cache.gates.col(t).segment(3 * h, h).array();
    const Eigen::ArrayXd cell_tanh = cache.cells.col(t).array().tanh();
    const Eigen::ArrayXd dh = hidden_grad.col(t).array() + next_hidden_grad.array();
    const Eigen::ArrayXd dc = dh * o * (1.0 - cell_tanh.square()) + next_cell_grad.array();
    gate_grad.col(t).segment(0, h) = (dc * g * i * (1.0 - i)).matrix();
    gate_grad.col(t).segment(h, h) = (dc * previous_cell * f * (1.0 - f)).matrix();
    gate_grad.col(t).segment(2 * h, h) = (dh * cell_tanh * o * (1.0 - o)).matrix();
    gate_grad.col(t).segment(3 * h, h) = (dc * i * (1.0 - g.square())).matrix();
    next_cell_grad = (dc * f).matrix();
    next_hidden_grad = recurrent_weights.transpose() * gate_grad.col(t);
    if (!first) recurrent_weights_grad.noalias() += gate_grad.col(t) * cache.hidden.col(prev).transpose();
  }
  input_weights_grad.noalias() += gate_grad * cache.input.transpose();
  bias_grad += gate_grad.rowwise().sum();
  return input_weights.transpose() * gate_grad;
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, const DropoutConfig& dropout) {
  Eigen::MatrixXd mask(rows, cols);
  if (!dropout.active()) {
    mask.setOnes();
    return mask;
  }
  std::bernoulli_distribution keep(1.0 - dropout.rate);
  const double scale = 1.0 / (1.0 - dropout.rate);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) mask(r, c) = keep(*dropout.rng) ? scale : 0.0;
  }
  return mask;
}

void log_softmax(Eigen::VectorXd& scores) {
  const double top = scores.maxCoeff();
  if (top == kMinusInfinity) return;
  double total = 0.0;
  for (Eigen::Index r = 0; r < scores.size(); ++r) {
    if (scores(r) != kMinusInfinity) total += std::exp(scores(r) - top);
  }
  const double normalizer = top + std::log(total);
  for (Eigen::Index r = 0; r < scores.size(); ++r) {
    if (scores(r) != kMinusInfinity) scores(r) -= normalizer;
  }
}

// One fully connected ReLU layer evaluated on pre-projected boundary columns.
struct HiddenEval {
  Eigen::VectorXd pre;     // before ReLU
  Eigen::VectorXd output;  // after ReLU and dropout mask
  Eigen::VectorXd mask;
};

HiddenEval hidden_layer(std::initializer_list<Eigen::VectorXd> parts, const Eigen::MatrixXd& bias,
                        const DropoutConfig& dropout) {
  HiddenEval eval;
  eval.pre = bias.col(0);
  for (const auto& part : parts) eval.pre += part;
  eval.mask = dropout_mask(eval.pre.size(), 1, dropout).col(0);
  eval.output = eval.pre.cwiseMax(0.0).cwiseProduct(eval.mask);
  return eval;
}

Eigen::VectorXd hidden_backprop(const HiddenEval& eval, const Eigen::VectorXd& output_grad) {
  Eigen::VectorXd grad = output_grad.cwiseProduct(eval.mask);
  for (Eigen::Index r = 0; r < grad.size(); ++r) {
    if (eval.pre(r) <= 0.0) grad(r) = 0.0;
  }
  return grad;
}

}  // namespace

struct DocumentGraph::Impl {
  const Model& model;
  const ParameterSet& params;
  std::vector<int> word_ids;  // with sentinels
  DropoutConfig dropout;
  int n = 0;
  int h = 0;
  int feature_dim = 0;

  std::array<LstmCache, 4> lstm;  // 0f, 0b, 1f, 1b
  Eigen::MatrixXd mask0;         // 2h x T
  Eigen::MatrixXd mask1;
  Eigen::MatrixXd layer0;        // masked layer-0 output = layer-1 input
  Eigen::MatrixXd layer1;        // masked layer-1 output
  Eigen::MatrixXd features;      // 4h x (n + 1)

  // Boundary projections through each block of the hidden layers.
  std::array<Eigen::MatrixXd, 2> shift_proj;
  std::array<Eigen::MatrixXd, 3> combine_proj;
  std::array<Eigen::MatrixXd, 3> label_proj;
  std::array<Eigen::MatrixXd, 2> shift_proj_grad;
  std::array<Eigen::MatrixXd, 3> combine_proj_grad;
  std::array<Eigen::MatrixXd, 3> label_proj_grad;
  ParameterSet head_grads;  // only the head biases and output layers are used
  std::vector<bool> relu_pattern;

  void record_pattern(const HiddenEval& eval) {
    for (Eigen::Index r = 0; r < eval.pre.size(); ++r) relu_pattern.push_back(eval.pre(r) > 0.0);
  }

  struct StructuralEval {
    StepTarget key;
    bool trivial = true;
    HiddenEval shift;
    HiddenEval combine;
    Eigen::VectorXd log_probs;
  };
  struct LabelEval {
    StepTarget key;
    HiddenEval hidden;
    Eigen::VectorXd log_probs;
  };
  std::optional<StructuralEval> last_structural;
  std::optional<LabelEval> last_label;

  Impl(const Model& m, std::vector<int> ids, DropoutConfig d) : model(m), params(m.parameters()), dropout(d) {
    n = static_cast<int>(ids.size());
    if (n < 1) throw std::invalid_argument("cannot encode an empty document");
    const int vocabulary_size = static_cast<int>(model.vocabulary().words().size());
    word_ids.reserve(ids.size() + 2);
    word_ids.push_back(Vocabulary::kBegin);
    for (int id : ids) {
      if (id < 0 || id >= vocabulary_size) throw std::out_of_range("word id outside the vocabulary");
      word_ids.push_back(id);
    }
    word_ids.push_back(Vocabulary::kEnd);
    h = model.dims().hidden_dim;
    feature_dim = 4 * h;
    encode();
    project();
  }

  void encode() {
    const Eigen::Index steps = static_cast<Eigen::Index>(word_ids.size());
    const auto& embedding = params[ParameterSet::kEmbedding];
    Eigen::MatrixXd input(embedding.rows(), steps);
    for (Eigen::Index t = 0; t < steps; ++t) input.col(t) = embedding.col(word_ids[static_cast<std::size_t>(t)]);

    for (int direction = 0; direction < 2; ++direction) {
      const int base = ParameterSet::kLstmInput0F + 3 * direction;
      lstm[direction] = run_lstm(params[base], params[base + 1], params[base + 2], input, direction == 1);
    }
    mask0 = dropout_mask(2 * h, steps, dropout);
    layer0.resize(2 * h, steps);
    layer0 << lstm[0].hidden, lstm[1].hidden;
    layer0 = layer0.cwiseProduct(mask0);

    for (int direction = 0; direction < 2; ++direction) {
      const int base = ParameterSet::kLstmInput1F + 3 * direction;
      lstm[2 + direction] = run_lstm(params[base], params[base + 1], params[base + 2], layer0, direction == 1);
    }
    mask1 = dropout_mask(2 * h, steps, dropout);
    layer1.resize(2 * h, steps);
    layer1 << lstm[2].hidden, lstm[3].hidden;
    layer1 = layer1.cwiseProduct(mask1);

    features.resize(feature_dim, n + 1);
    for (int p = 0; p <= n; ++p) {
      features.col(p).segment(0, h) = layer0.col(p).segment(0, h);
      features.col(p).segment(h, h) = layer0.col(p + 1).segment(h, h);
      features.col(p).segment(2 * h, h) = layer1.col(p).segment(0, h);
      features.col(p).segment(3 * h, h) = layer1.col(p + 1).segment(h, h);
    }
  }

  void project() {
    const int f = feature_dim;
    for (int b = 0; b < 2; ++b) {
      shift_proj[b] = params[ParameterSet::kShiftHidden].middleCols(b * f, f) * features;
      shift_proj_grad[b] = Eigen::MatrixXd::Zero(shift_proj[b].rows(), n + 1);
    }
    for (int b = 0; b < 3; ++b) {
      combine_proj[b] = params[ParameterSet::kCombineHidden].middleCols(b * f, f) * features;
      combine_proj_grad[b] = Eigen::MatrixXd::Zero(combine_proj[b].rows(), n + 1);
      label_proj[b] = params[ParameterSet::kLabelHidden].middleCols(b * f, f) * features;
      label_proj_grad[b] = Eigen::MatrixXd::Zero(label_proj[b].rows(), n + 1);
    }
    head_grads = params.zeros_like();
  }

  static bool same_key(const StepTarget& a, const StepTarget& b) {
    return a.kind == b.kind && a.left == b.left && a.mid == b.mid && a.right == b.right &&
           a.shift_legal == b.shift_legal && a.combine_legal == b.combine_legal &&
           a.no_label_legal == b.no_label_legal;
  }

  void check_boundary(int p) const {
    if (p < 0 || p > n) throw std::out_of_range("boundary " + std::to_string(p) + " outside the document");
  }

  const StructuralEval& eval_structural(const StepTarget& step) {
    if (!step.shift_legal && !step.combine_legal) throw std::logic_error("no structural action is legal");
    StructuralEval eval;
    eval.key = step;
    eval.log_probs = Eigen::VectorXd::Constant(2, kMinusInfinity);
    if (step.shift_legal != step.combine_legal) {
      eval.log_probs(step.shift_legal ? 0 : 1) = 0.0;
    } else {
      check_boundary(step.left);
      check_boundary(step.mid);
      check_boundary(step.right);
      eval.trivial = false;
      eval.shift = hidden_layer({shift_proj[0].col(step.mid), shift_proj[1].col(step.right)},
                                params[ParameterSet::kShiftHiddenBias], dropout);
      eval.combine = hidden_layer(
          {combine_proj[0].col(step.left), combine_proj[1].col(step.mid), combine_proj[2].col(step.right)},
          params[ParameterSet::kCombineHiddenBias], dropout);
      record_pattern(eval.shift);
      record_pattern(eval.combine);
      eval.log_probs(0) = params[ParameterSet::kShiftOut].row(0).dot(eval.shift.output) +
                          params[ParameterSet::kShiftOutBias](0, 0);
      eval.log_probs(1) = params[ParameterSet::kCombineOut].row(0).dot(eval.combine.output) +
                          params[ParameterSet::kCombineOutBias](0, 0);
      log_softmax(eval.log_probs);
    }
    last_structural = std::move(eval);
    return *last_structural;
  }

  const LabelEval& eval_label(const StepTarget& step) {
    check_boundary(step.left);
    check_boundary(step.mid);
    check_boundary(step.right);
    LabelEval eval;
    eval.key = step;
    eval.hidden = hidden_layer(
        {label_proj[0].col(step.left), label_proj[1].col(step.mid), label_proj[2].col(step.right)},
        params[ParameterSet::kLabelHiddenBias], dropout);
    record_pattern(eval.hidden);
    eval.log_probs = params[ParameterSet::kLabelOut] * eval.hidden.output + params[ParameterSet::kLabelOutBias].col(0);
    if (!step.no_label_legal) eval.log_probs(eval.log_probs.size() - 1) = kMinusInfinity;
    log_softmax(eval.log_probs);
    last_label = std::move(eval);
    return *last_label;
  }

  // Gradient of -log p(target) with respect to the scores.
  static Eigen::VectorXd score_grad(const Eigen::VectorXd& log_probs, int target) {
    Eigen::VectorXd grad(log_probs.size());
    for (Eigen::Index r = 0; r < log_probs.size(); ++r) {
      grad(r) = log_probs(r) == kMinusInfinity ? 0.0 : std::exp(log_probs(r));
    }
    grad(target) -= 1.0;
    return grad;
  }

  double backward_structural(const StepTarget& step) {
    if (!last_structural || !same_key(last_structural->key, step)) eval_structural(step);
    const auto& eval = *last_structural;
    if (step.target < 0 || step.target > 1) throw std::out_of_range("structural target must be 0 or 1");
    const double log_prob = eval.log_probs(step.target);
    if (!std::isfinite(log_prob)) throw std::runtime_error("structural target has zero probability");
    if (eval.trivial) return -log_prob;
    const Eigen::VectorXd grad = score_grad(eval.log_probs, step.target);

    head_grads[ParameterSet::kShiftOut].row(0) += grad(0) * eval.shift.output.transpose();
    head_grads[ParameterSet::kShiftOutBias](0, 0) += grad(0);
    const Eigen::VectorXd shift_hidden =
        hidden_backprop(eval.shift, grad(0) * params[ParameterSet::kShiftOut].row(0).transpose());
    head_grads[ParameterSet::kShiftHiddenBias].col(0) += shift_hidden;
    shift_proj_grad[0].col(step.mid) += shift_hidden;
    shift_proj_grad[1].col(step.right) += shift_hidden;

    head_grads[ParameterSet::kCombineOut].row(0) += grad(1) * eval.combine.output.transpose();
    head_grads[ParameterSet::kCombineOutBias](0, 0) += grad(1);
    const Eigen::VectorXd combine_hidden =
        hidden_backprop(eval.combine, grad(1) * params[ParameterSet::kCombineOut].row(0).transpose());
    head_grads[ParameterSet::kCombineHiddenBias].col(0) += combine_hidden;
    combine_proj_grad[0].col(step.left) += combine_hidden;
    combine_proj_grad[1].col(step.mid) += combine_hidden;
    combine_proj_grad[2].col(step.right) += combine_hidden;
    return -log_prob;
  }

  double backward_label(const StepTarget& step) {
    if (!last_label || !same_key(last_label->key, step)) eval_label(step);
    const auto& eval = *last_label;
    if (step.target < 0 || step.target >= eval.log_probs.size()) throw std::out_of_range("label target out of range");
    const double log_prob = eval.log_probs(step.target);
    if (!std::isfinite(log_prob)) throw std::runtime_error("label target has zero probability");
    const Eigen::VectorXd grad = score_grad(eval.log_probs, step.target);
    head_grads[ParameterSet::kLabelOut].noalias() += grad * eval.hidden.output.transpose();
    head_grads[ParameterSet::kLabelOutBias].col(0) += grad;
    const Eigen::VectorXd hidden =
        hidden_backprop(eval.hidden, params[ParameterSet::kLabelOut].transpose() * grad);
    head_grads[ParameterSet::kLabelHiddenBias].col(0) += hidden;
    label_proj_grad[0].col(step.left) += hidden;
    label_proj_grad[1].col(step.mid) += hidden;
    label_proj_grad[2].col(step.right) += hidden;
    return -log_prob;
  }

  void backward(ParameterSet& grads) {
    const int f = feature_dim;
    Eigen::MatrixXd feature_grad = Eigen::MatrixXd::Zero(f, n + 1);
    auto push = [&](int weight, int block, const Eigen::MatrixXd& proj_grad) {
      grads[weight].middleCols(block * f, f).noalias() += proj_grad * features.transpose();
      feature_grad.noalias() += params[weight].middleCols(block * f, f).transpose() * proj_grad;
    };
    for (int b = 0; b < 2; ++b) push(ParameterSet::kShiftHidden, b, shift_proj_grad[b]);
    for (int b = 0; b < 3; ++b) {
      push(ParameterSet::kCombineHidden, b, combine_proj_grad[b]);
      push(ParameterSet::kLabelHidden, b, label_proj_grad[b]);
    }
    for (int index : {ParameterSet::kShiftHiddenBias, ParameterSet::kShiftOut, ParameterSet::kShiftOutBias,
                      ParameterSet::kCombineHiddenBias, ParameterSet::kCombineOut, ParameterSet::kCombineOutBias,
                      ParameterSet::kLabelHiddenBias, ParameterSet::kLabelOut, ParameterSet::kLabelOutBias}) {
      grads[index] += head_grads[index];
    }

    const Eigen::Index steps = static_cast<Eigen::Index>(word_ids.size());
    Eigen::MatrixXd layer0_grad = Eigen::MatrixXd::Zero(2 * h, steps);
    Eigen::MatrixXd layer1_grad = Eigen::MatrixXd::Zero(2 * h, steps);
    for (int p = 0; p <= n; ++p) {
      layer0_grad.col(p).segment(0, h) += feature_grad.col(p).segment(0, h);
      layer0_grad.col(p + 1).segment(h, h) += feature_grad.col(p).segment(h, h);
      layer1_grad.col(p).segment(0, h) += feature_grad.col(p).segment(2 * h, h);
      layer1_grad.col(p + 1).segment(h, h) += feature_grad.col(p).segment(3 * h, h);
    }

    layer1_grad = layer1_grad.cwiseProduct(mask1);
    for (int direction = 0; direction < 2; ++direction) {
      const int base = ParameterSet::kLstmInput1F + 3 * direction;
      layer0_grad += backprop_lstm(lstm[2 + direction], layer1_grad.middleRows(direction * h, h), params[base],
                                   params[base + 1], grads[base], grads[base + 1], grads[base + 2]);
    }
    layer0_grad = layer0_grad.cwiseProduct(mask0);
    Eigen::MatrixXd input_grad = Eigen::MatrixXd::Zero(params[ParameterSet::kEmbedding].rows(), steps);
    for (int direction = 0; direction < 2; ++direction) {
      const int base = ParameterSet::kLstmInput0F + 3 * direction;
      input_grad += backprop_lstm(lstm[direction], layer0_grad.middleRows(direction * h, h), params[base],
                                  params[base + 1], grads[base], grads[base + 1], grads[base + 2]);
    }
    auto& embedding_grad = grads[ParameterSet::kEmbedding];
    for (Eigen::Index t = 0; t < steps; ++t) embedding_grad.col(word_ids[static_cast<std::size_t>(t)]) += input_grad.col(t);
  }
};

DocumentGraph::DocumentGraph(const Model& model, std::vector<int> word_ids, DropoutConfig dropout)
    : impl_(std::make_unique<Impl>(model, std::move(word_ids), dropout)) {}

DocumentGraph::~DocumentGraph() = default;

int DocumentGraph::length() const { return impl_->n; }

std::span<const std::string> DocumentGraph::label_inventory() const { return impl_->model.vocabulary().labels(); }

std::array<double, 2> DocumentGraph::structural(const StepTarget& step) {
  const auto& eval = impl_->eval_structural(step);
  return {eval.log_probs(0), eval.log_probs(1)};
}

std::vector<double> DocumentGraph::labels(const StepTarget& step) {
  const auto& eval = impl_->eval_label(step);
  return {eval.log_probs.data(), eval.log_probs.data() + eval.log_probs.size()};
}

std::array<double, 2> DocumentGraph::structural(const ParserState& state) {
  return structural(StepTarget::structural(state, Action::shift()));
}

std::vector<double> DocumentGraph::labels(const ParserState& state) {
  StepTarget step;
  step.kind = StepTarget::Kind::Label;
  step.left = state.top().begin;
  step.mid = state.midpoint.value_or(step.left);
  step.right = state.top().end;
  step.no_label_legal = can_skip_label(state);
  return labels(step);
}

double DocumentGraph::backward_step(const StepTarget& step) {
  const double loss = step.kind == StepTarget::Kind::Structural ? impl_->backward_structural(step)
                                                                : impl_->backward_label(step);
  loss_ += loss;
  return loss;
}

void DocumentGraph::backward(ParameterSet& grads) { impl_->backward(grads); }

const Eigen::MatrixXd& DocumentGraph::features() const { return impl_->features; }

const std::vector<bool>& DocumentGraph::relu_pattern() const { return impl_->relu_pattern; }

LossAndGradients loss_and_gradients(const Model& model, std::span<const std::string> tokens,
                                    std::span<const StepTarget> steps, DropoutConfig dropout) {
  LossAndGradients result;
  result.gradients = model.parameters().zeros_like();
  if (steps.empty()) return result;
  DocumentGraph graph(model, model.vocabulary().encode(tokens), dropout);
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const auto& step = steps[s];
    if (step.kind == StepTarget::Kind::Structural) {
      graph.structural(step);
    } else {
      graph.labels(step);
    }
    try {
      graph.backward_step(step);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("non-finite loss at step " + std::to_string(s) + ": " + e.what());
    }
  }
  if (!std::isfinite(graph.loss())) throw std::runtime_error("non-finite document loss");
  graph.backward(result.gradients);
  result.loss = graph.loss();
  result.relu_pattern = graph.relu_pattern();
  return result;
}

}  // namespace jointparse
