#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "jointparse/model.hpp"
#include "jointparse/transition.hpp"

// Independent checks used by `jointparse verify` and the test suites. Nothing
// here is called by the parser itself.
namespace jointparse::verify {

// Exhaustive search over every legal completion of a state. The value of a
// completion is (gold spans gained, non-gold spans labeled), compared
// lexicographically: more gold first, then fewer wrong labels.
class CompletionSearch {
 public:
  CompletionSearch(GoldSpans gold, std::vector<std::string> inventory);

  // Best (gained, -wrong) over completions, excluding spans labeled so far.
  std::pair<int, int> best_future(const ParserState& state);
  // |labeled ∩ gold| now plus the best number still gainable.
  int best_final_count(const ParserState& state);
  // Legal actions that start some optimal completion.
  std::vector<Action> optimal_actions(const ParserState& state);

  std::size_t memo_size() const { return memo_.size(); }

 private:
  std::pair<int, int> gain(const ParserState& state, const Action& action) const;

  GoldSpans gold_;
  std::vector<std::string> inventory_;
  std::map<std::pair<std::vector<int>, int>, std::pair<int, int>> memo_;
};

// Non-terminal states visited by mixed random / oracle walks over `gold`.
std::vector<ParserState> sample_states(const JointTree& gold, std::span<const std::string> inventory, int walks,
                                       std::uint64_t seed);

struct OracleReport {
  long states = 0;
  long set_mismatches = 0;
  long count_mismatches = 0;
  std::vector<std::string> examples;  // first few mismatches, human-readable

  bool ok() const { return states > 0 && set_mismatches == 0 && count_mismatches == 0; }
};

// Compares dynamic_oracle and reachable_count with exhaustive search on at
// least `min_states` states drawn from synthetic documents of at most
// `max_tokens` tokens.
OracleReport check_dynamic_oracle(std::uint64_t seed, long min_states = 1000, int max_tokens = 6);

struct GradcheckReport {
  long coordinates = 0;
  long failures = 0;
  long kinks = 0;  // coordinates re-checked with a smaller step
  int documents = 0;
  int slices = 0;
  double max_relative_error = 0.0;
  std::vector<std::string> examples;

  bool ok() const { return coordinates > 0 && failures == 0; }
};

struct GradcheckOptions {
  int documents = 3;
  int slices_per_document = 5;  // parameter tensors sampled per document
  int coordinates_per_slice = 8;
  double step = 1e-4;
  double tolerance = 1e-4;
  int max_step_reductions = 4;  // tenfold each, used only across ReLU kinks
  int max_tokens = 8;
  ModelDims dims{4, 3, 5};  // small, so each perturbed evaluation is cheap
};

// |a - n| / max(|a|, |n|, 1e-6)
double relative_error(double analytic, double numeric);

// Central differences against loss_and_gradients on a randomly initialized
// model, dropout off. Coordinates whose perturbation window crosses a ReLU
// boundary are counted in `kinks` and compared at a smaller step.
GradcheckReport check_gradients(std::uint64_t seed, const GradcheckOptions& options = {});

}  // namespace jointparse::verify
