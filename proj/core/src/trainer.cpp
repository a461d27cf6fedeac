#include "jointparse/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "jointparse/spans.hpp"

namespace jointparse {

void TrainConfig::validate(std::size_t treebank_size) const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (dev_size < 0) throw std::invalid_argument("dev_size must be non-negative");
  if (treebank_size == 0) throw std::invalid_argument("training needs at least one document");
  if (static_cast<std::size_t>(dev_size) >= treebank_size) {
    throw std::invalid_argument("dev_size must be smaller than the treebank");
  }
  if (!(unk_replace >= 0.0 && unk_replace <= 1.0)) throw std::invalid_argument("unk_replace must lie in [0, 1]");
  if (!(optimizer.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (dims.word_dim < 1 || dims.hidden_dim < 1 || dims.mlp_dim < 1) {
    throw std::invalid_argument("model dimensions must be positive");
  }
}

Adam::Adam(const ParameterSet& shape, OptimizerConfig config)
    : config_(config), first_(shape.zeros_like()), second_(shape.zeros_like()) {}

double Adam::step(ParameterSet& params, ParameterSet& grads) {
  const double norm = std::sqrt(grads.squared_norm());
  if (config_.clip_norm > 0.0 && norm > config_.clip_norm) grads.scale(config_.clip_norm / norm);
  ++steps_;
  const double correction1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  const double rate = config_.learning_rate * std::sqrt(correction2) / correction1;
  for (int i = 0; i < ParameterSet::kCount; ++i) {
    first_[i] = config_.beta1 * first_[i] + (1.0 - config_.beta1) * grads[i];
    second_[i] = config_.beta2 * second_[i] + (1.0 - config_.beta2) * grads[i].cwiseAbs2();
    params[i].array() -= rate * first_[i].array() / (second_[i].array().sqrt() + config_.epsilon);
  }
  return norm;
}

namespace {

std::size_t best_index(std::span<const double> scores) {
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

}  // namespace

std::vector<RolloutStep> rollout(DocumentGraph& graph, const JointTree& gold, const Vocabulary& vocabulary,
                                 const RolloutOptions& options, std::mt19937_64& rng) {
  const GoldSpans gold_spans(gold);
  const int n = static_cast<int>(gold.tokens.size());
  if (graph.length() != n) throw std::invalid_argument("graph and gold tree differ in length");
  std::bernoulli_distribution follow_oracle(options.beta);

  std::vector<RolloutStep> steps;
  ParserState state = ParserState::axiom(n);
  while (!state.is_terminal()) {
    RolloutStep record;
    if (options.record_states) record.state = state;
    record.oracle = dynamic_oracle(state, gold_spans);

    if (phase(state) == Phase::Structural) {
      const StepTarget probe = StepTarget::structural(state, Action::shift());
      const auto scores = graph.structural(probe);
      record.target = record.oracle.front();
      for (const auto& action : record.oracle) {
        const int index = action.kind == Action::Kind::Combine ? 1 : 0;
        const int current = record.target.kind == Action::Kind::Combine ? 1 : 0;
        if (scores[index] > scores[current]) record.target = action;
      }
      record.step = StepTarget::structural(state, record.target);
      const bool use_oracle = follow_oracle(rng);
      record.followed = use_oracle ? record.target : (scores[0] >= scores[1] ? Action::shift() : Action::combine());
    } else {
      StepTarget probe = StepTarget::label(state, Action::no_label(), vocabulary);
      const auto scores = graph.labels(probe);
      record.target = record.oracle.front();
      record.step = StepTarget::label(state, record.target, vocabulary);
      const bool use_oracle = follow_oracle(rng);
      if (use_oracle) {
        record.followed = record.target;
      } else {
        const std::size_t best = best_index(scores);
        record.followed = static_cast<int>(best) == vocabulary.no_label_id()
                              ? Action::no_label()
                              : Action::label(vocabulary.labels()[best]);
      }
    }
    if (options.accumulate) graph.backward_step(record.step);
    state = apply(state, record.followed);
    steps.push_back(std::move(record));
  }
  return steps;
}

std::vector<JointTree> parse_documents(const Model& model, const std::vector<JointTree>& gold, TrainMode mode) {
  std::vector<JointTree> out;
  out.reserve(gold.size());
  for (const auto& tree : gold) {
    DocumentGraph graph(model, model.vocabulary().encode(tree.tokens));
    DecodeOptions options;
    if (mode == TrainMode::GoldEdu) options.gold_edus = extract_edus(tree);
    out.push_back(parse_greedy(graph, tree.tokens, options).tree);
  }
  return out;
}

DocumentCounts evaluate_model(const Model& model, const std::vector<JointTree>& gold, TrainMode mode) {
  const auto predicted = parse_documents(model, gold, mode);
  return evaluate_corpus(gold, predicted).corpus;
}

std::string format_epoch(const EpochRecord& record) {
  char line[256];
  std::snprintf(line, sizeof(line),
                "epoch %d loss %.4f dev overall %.2f struct %.2f nuc %.2f rel %.2f time %.2fs", record.epoch,
                record.loss, 100.0 * record.dev.overall.prf().f1, 100.0 * record.dev.discourse.structure.prf().f1,
                100.0 * record.dev.discourse.nuclearity.prf().f1, 100.0 * record.dev.discourse.relation.prf().f1,
                record.seconds);
  return line;
}

TrainResult train(const std::vector<JointTree>& treebank, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate(treebank.size());
  std::mt19937_64 rng(config.seed);

  std::vector<std::size_t> order(treebank.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<JointTree> dev;
  std::vector<JointTree> training;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < static_cast<std::size_t>(config.dev_size) ? dev : training).push_back(treebank[order[i]]);
  }
  const std::vector<JointTree>& selection_set = dev.empty() ? training : dev;

  Model model(Vocabulary::build(training), config.dims, rng());
  Adam optimizer(model.parameters(), config.optimizer);
  const Vocabulary& vocabulary = model.vocabulary();

  TrainResult result{model, 0, {}, dev};
  double best_f1 = -1.0;
  if (config.output_dir) std::filesystem::create_directories(*config.output_dir);

  std::vector<std::size_t> epoch_order(training.size());
  std::iota(epoch_order.begin(), epoch_order.end(), 0);
  std::bernoulli_distribution replace(config.unk_replace);
  RolloutOptions rollout_options;
  rollout_options.beta = config.beta;
  rollout_options.accumulate = true;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::shuffle(epoch_order.begin(), epoch_order.end(), rng);
    EpochRecord record;
    record.epoch = epoch;
    ParameterSet grads = model.parameters().zeros_like();
    for (std::size_t position = 0; position < epoch_order.size(); ++position) {
      const JointTree& gold = training[epoch_order[position]];
      std::vector<int> ids = vocabulary.encode(gold.tokens);
      for (int& id : ids) {
        if (vocabulary.count(id) == 1 && replace(rng)) id = Vocabulary::kUnknown;
      }
      grads.set_zero();
      DocumentGraph graph(model, std::move(ids), DropoutConfig{config.dropout, &rng});
      try {
        rollout(graph, gold, vocabulary, rollout_options, rng);
      } catch (const std::runtime_error& e) {
        throw TrainingDiverged("epoch " + std::to_string(epoch) + ", document " + std::to_string(position) + ": " +
                               e.what());
      }
      graph.backward(grads);
      if (!std::isfinite(graph.loss()) || !grads.all_finite()) {
        throw TrainingDiverged("epoch " + std::to_string(epoch) + ", document " + std::to_string(position) +
                               ": non-finite loss or gradient");
      }
      record.loss += graph.loss();
      optimizer.step(model.parameters(), grads);
    }

    record.dev = evaluate_model(model, selection_set, config.mode);
    record.selection_f1 = config.mode == TrainMode::GoldEdu ? record.dev.discourse.relation.prf().f1
                                                            : record.dev.overall.prf().f1;
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (config.output_dir) model.save(*config.output_dir / ("epoch-" + std::to_string(epoch) + ".ckpt"));
    if (record.selection_f1 > best_f1) {
      best_f1 = record.selection_f1;
      result.best_epoch = epoch;
      result.best_model = model;
      if (config.output_dir) model.save(*config.output_dir / "best.ckpt");
    }
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  return result;
}

std::vector<SweepPoint> beta_sweep(const std::vector<JointTree>& treebank, TrainConfig config,
                                   const std::vector<double>& betas) {
  std::vector<SweepPoint> points;
  config.output_dir.reset();
  for (double beta : betas) {
    config.beta = beta;
    const auto result = train(treebank, config);
    const auto& best = result.history.at(static_cast<std::size_t>(result.best_epoch - 1));
    points.push_back({beta, best.selection_f1, result.best_epoch});
  }
  return points;
}

}  // namespace jointparse
