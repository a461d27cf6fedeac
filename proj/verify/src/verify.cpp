#include "jointparse/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "jointparse/model.hpp"
#include "jointparse/spans.hpp"
#include "jointparse/synthetic.hpp"
#include "jointparse/trainer.hpp"

namespace jointparse::verify {

namespace {

std::pair<int, int> operator+(std::pair<int, int> a, std::pair<int, int> b) {
  return {a.first + b.first, a.second + b.second};
}

std::string describe(const ParserState& state) {
  std::ostringstream out;
  out << "n=" << state.n << " boundaries=[";
  for (std::size_t i = 0; i < state.boundaries.size(); ++i) out << (i ? "," : "") << state.boundaries[i];
  out << "] midpoint=" << (state.midpoint ? std::to_string(*state.midpoint) : "none") << " labeled={";
  for (const auto& span : state.labeled) out << " (" << span.begin << "," << span.end << "," << span.chain << ")";
  out << " }";
  return out.str();
}

std::string describe(const std::vector<Action>& actions) {
  std::string out = "{";
  for (const auto& action : actions) out += " " + to_mnemonic(action);
  return out + " }";
}

int correct_so_far(const ParserState& state, const GoldSpans& gold) {
  int count = 0;
  for (const auto& span : state.labeled) {
    const std::string* chain = gold.find(span.begin, span.end);
    if (chain && *chain == span.chain) ++count;
  }
  return count;
}

std::vector<std::string> inventory_for(const JointTree& gold) {
  std::set<std::string> chains;
  for (const auto& span : labeled_spans(gold)) chains.insert(span.chain);
  // Distractors that never occur in gold.
  chains.insert("QP");
  chains.insert("Summary->");
  return {chains.begin(), chains.end()};
}

}  // namespace

CompletionSearch::CompletionSearch(GoldSpans gold, std::vector<std::string> inventory)
    : gold_(std::move(gold)), inventory_(std::move(inventory)) {}

std::pair<int, int> CompletionSearch::gain(const ParserState& state, const Action& action) const {
  if (action.kind != Action::Kind::Label) return {0, 0};
  const Span top = state.top();
  const std::string* chain = gold_.find(top.begin, top.end);
  if (chain && *chain == action.chain) return {1, 0};
  return {0, -1};
}

std::pair<int, int> CompletionSearch::best_future(const ParserState& state) {
  if (state.is_terminal()) return {0, 0};
  const auto key = std::make_pair(state.boundaries, state.midpoint.value_or(-2));
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  std::pair<int, int> best{-1, -1000000};
  for (const auto& action : legal_actions(state, inventory_)) {
    ParserState next = apply(state, action);
    next.labeled.clear();  // future value never depends on past labels
    best = std::max(best, gain(state, action) + best_future(next));
  }
  memo_.emplace(key, best);
  return best;
}

int CompletionSearch::best_final_count(const ParserState& state) {
  return correct_so_far(state, gold_) + best_future(state).first;
}

std::vector<Action> CompletionSearch::optimal_actions(const ParserState& state) {
  const auto best = best_future(state);
  std::vector<Action> out;
  for (const auto& action : legal_actions(state, inventory_)) {
    ParserState next = apply(state, action);
    next.labeled.clear();
    if (gain(state, action) + best_future(next) == best) out.push_back(action);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ParserState> sample_states(const JointTree& gold, std::span<const std::string> inventory, int walks,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const GoldSpans gold_spans(gold);
  const int n = static_cast<int>(gold.tokens.size());
  std::vector<ParserState> out;
  std::set<std::pair<std::vector<int>, std::vector<LabeledSpan>>> seen;
  for (int walk = 0; walk < walks; ++walk) {
    // Walks range from pure oracle to pure noise.
    const double oracle_rate = static_cast<double>(walk % 5) / 4.0;
    std::bernoulli_distribution follow(oracle_rate);
    ParserState state = ParserState::axiom(n);
    while (!state.is_terminal()) {
      std::vector<int> key = state.boundaries;
      key.push_back(state.midpoint.value_or(-2));
      if (seen.emplace(std::move(key), state.labeled).second) out.push_back(state);
      std::vector<Action> options = follow(rng) ? dynamic_oracle(state, gold_spans) : legal_actions(state, inventory);
      std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
      state = apply(state, options[pick(rng)]);
    }
  }
  return out;
}

OracleReport check_dynamic_oracle(std::uint64_t seed, long min_states, int max_tokens) {
  SyntheticParams params;
  params.max_tokens = max_tokens;
  params.max_edus = std::max(1, std::min(params.max_edus, max_tokens / 2));
  OracleReport report;
  std::uint64_t document = 0;
  while (report.states < min_states) {
    const JointTree gold = generate_synthetic(seed + document, params);
    const auto inventory = inventory_for(gold);
    const GoldSpans gold_spans(gold);
    CompletionSearch search(gold_spans, inventory);
    for (const auto& state : sample_states(gold, inventory, 12, seed ^ (document * 0x9e3779b97f4a7c15ULL))) {
      ++report.states;
      const int expected_count = search.best_final_count(state);
      const int actual_count = reachable_count(state, gold_spans);
      if (expected_count != actual_count) {
        ++report.count_mismatches;
        if (report.examples.size() < 5) {
          report.examples.push_back("reachable_count " + std::to_string(actual_count) + " != exhaustive " +
                                    std::to_string(expected_count) + " at " + describe(state));
        }
      }
      auto oracle = dynamic_oracle(state, gold_spans);
      std::sort(oracle.begin(), oracle.end());
      const auto expected = search.optimal_actions(state);
      if (oracle != expected) {
        ++report.set_mismatches;
        if (report.examples.size() < 5) {
          report.examples.push_back("oracle " + describe(oracle) + " != exhaustive " + describe(expected) + " at " +
                                    describe(state));
        }
      }
    }
    ++document;
  }
  return report;
}

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

GradcheckReport check_gradients(std::uint64_t seed, const GradcheckOptions& options) {
  SyntheticParams params;
  params.max_tokens = options.max_tokens;
  params.max_edus = std::max(1, std::min(params.max_edus, options.max_tokens / 2));
  const auto documents = generate_treebank(seed, options.documents, params);
  Model model(Vocabulary::build(documents), options.dims, seed + 1);
  std::mt19937_64 rng(seed + 2);

  GradcheckReport report;
  report.documents = options.documents;
  for (const auto& gold : documents) {
    // Targets come from an exploratory rollout so non-gold states are covered.
    std::vector<StepTarget> steps;
    {
      DocumentGraph graph(model, model.vocabulary().encode(gold.tokens));
      RolloutOptions rollout_options;
      rollout_options.beta = 0.5;
      for (auto& step : rollout(graph, gold, model.vocabulary(), rollout_options, rng)) steps.push_back(step.step);
    }
    const auto analytic = loss_and_gradients(model, gold.tokens, steps);
    const auto ids = model.vocabulary().encode(gold.tokens);

    std::vector<int> tensors(ParameterSet::kCount);
    std::iota(tensors.begin(), tensors.end(), 0);
    std::shuffle(tensors.begin(), tensors.end(), rng);
    tensors.resize(static_cast<std::size_t>(std::min<int>(options.slices_per_document, ParameterSet::kCount)));
    for (int tensor : tensors) {
      ++report.slices;
      Eigen::MatrixXd& values = model.parameters()[tensor];
      std::vector<std::pair<Eigen::Index, Eigen::Index>> coordinates;
      if (tensor == ParameterSet::kEmbedding) {
        // Only rows of words present in the document carry gradient.
        std::uniform_int_distribution<std::size_t> word(0, ids.size() - 1);
        std::uniform_int_distribution<Eigen::Index> row(0, values.rows() - 1);
        for (int c = 0; c < options.coordinates_per_slice; ++c) coordinates.emplace_back(row(rng), ids[word(rng)]);
      } else {
        std::uniform_int_distribution<Eigen::Index> row(0, values.rows() - 1);
        std::uniform_int_distribution<Eigen::Index> col(0, values.cols() - 1);
        for (int c = 0; c < options.coordinates_per_slice; ++c) coordinates.emplace_back(row(rng), col(rng));
      }
      for (const auto& [r, c] : coordinates) {
        // A ReLU that flips inside [x - h, x + h] puts a kink in the window,
        // where central differences do not estimate the derivative. Such
        // coordinates are re-checked with the step shrunk until no unit flips.
        const double original = values(r, c);
        double step = options.step;
        double numeric = 0.0;
        bool smooth = false;
        for (int attempt = 0; attempt <= options.max_step_reductions; ++attempt, step /= 10.0) {
          values(r, c) = original + step;
          const auto plus = loss_and_gradients(model, gold.tokens, steps);
          values(r, c) = original - step;
          const auto minus = loss_and_gradients(model, gold.tokens, steps);
          values(r, c) = original;
          numeric = (plus.loss - minus.loss) / (2.0 * step);
          smooth = plus.relu_pattern == analytic.relu_pattern && minus.relu_pattern == analytic.relu_pattern;
          if (smooth) break;
        }
        if (step < options.step) ++report.kinks;
        const double exact = analytic.gradients[tensor](r, c);
        const double error = relative_error(exact, numeric);
        ++report.coordinates;
        report.max_relative_error = std::max(report.max_relative_error, error);
        if (!smooth || !(error <= options.tolerance)) {
          ++report.failures;
          if (report.examples.size() < 5) {
            std::ostringstream line;
            line << ParameterSet::name(tensor) << "(" << r << "," << c << "): analytic " << exact << " numeric "
                 << numeric << " relative error " << error << (smooth ? "" : " (kink not resolved)");
            report.examples.push_back(line.str());
          }
        }
      }
    }
  }
  return report;
}

}  // namespace jointparse::verify
