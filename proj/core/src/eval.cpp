#include "jointparse/eval.hpp"

#include <map>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "jointparse/spans.hpp"
#include "jointparse/transition.hpp"

namespace jointparse {

PRF MatchCounts::prf() const {
  PRF out;
  if (gold == 0 && predicted == 0) return {1.0, 1.0, 1.0};
  out.precision = predicted > 0 ? static_cast<double>(matched) / static_cast<double>(predicted) : 0.0;
  out.recall = gold > 0 ? static_cast<double>(matched) / static_cast<double>(gold) : 0.0;
  const double sum = out.precision + out.recall;
  out.f1 = sum > 0.0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& other) {
  matched += other.matched;
  gold += other.gold;
  predicted += other.predicted;
  return *this;
}

namespace {

void require_same_tokens(const JointTree& gold, const JointTree& predicted) {
  if (gold.tokens != predicted.tokens) {
    throw std::invalid_argument("gold and predicted trees cover different token sequences");
  }
}

template <typename Key>
MatchCounts multiset_match(const std::vector<Key>& gold, const std::vector<Key>& predicted) {
  std::map<Key, long> remaining;
  for (const auto& key : gold) ++remaining[key];
  MatchCounts counts;
  counts.gold = static_cast<long>(gold.size());
  counts.predicted = static_cast<long>(predicted.size());
  for (const auto& key : predicted) {
    auto it = remaining.find(key);
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      ++counts.matched;
    }
  }
  return counts;
}

std::vector<LabeledSpan> filtered_spans(const JointTree& tree, SpanLevel level) {
  std::vector<LabeledSpan> out;
  for (auto& span : labeled_spans(tree)) {
    // EDU wrappers from gold-EDU decoding carry no constituent.
    if (span.chain == kEduLabel) continue;
    const bool discourse = chain_is_discourse(span.chain);
    if (level == SpanLevel::All || (level == SpanLevel::Discourse) == discourse) out.push_back(std::move(span));
  }
  return out;
}

using DiscourseKey = std::tuple<int, int, int, std::string>;

struct DiscourseKeys {
  std::vector<DiscourseKey> structure;
  std::vector<DiscourseKey> nuclearity;
  std::vector<DiscourseKey> relation;
};

DiscourseKeys discourse_keys(const JointTree& tree) {
  DiscourseKeys keys;
  for (const auto& span : filtered_spans(tree, SpanLevel::Discourse)) {
    Label label;
    for (const auto& part : split_chain(span.chain)) {
      label = parse_label(part);
      if (label.is_discourse()) break;
    }
    const int form = static_cast<int>(*label.nuclearity);
    keys.structure.emplace_back(span.begin, span.end, -1, std::string());
    keys.nuclearity.emplace_back(span.begin, span.end, form, std::string());
    keys.relation.emplace_back(span.begin, span.end, form, label.name);
  }
  return keys;
}

}  // namespace

MatchCounts span_counts(const JointTree& gold, const JointTree& predicted, SpanLevel level) {
  require_same_tokens(gold, predicted);
  return multiset_match(filtered_spans(gold, level), filtered_spans(predicted, level));
}

PRF span_prf(const JointTree& gold, const JointTree& predicted, SpanLevel level) {
  return span_counts(gold, predicted, level).prf();
}

MatchCounts segmentation_counts(std::span<const EduSpan> gold, std::span<const EduSpan> predicted) {
  if (gold.empty() || predicted.empty()) throw std::invalid_argument("segmentation is empty");
  const int n = gold.back().end;
  if (!tiles(gold, n) || !tiles(predicted, n)) {
    throw std::invalid_argument("segmentations must tile the same document");
  }
  auto boundaries = [](std::span<const EduSpan> edus) {
    std::vector<int> out;
    for (const auto& edu : edus) {
      if (edu.start > 0) out.push_back(edu.start);
    }
    return out;
  };
  return multiset_match(boundaries(gold), boundaries(predicted));
}

PRF segmentation_f1(std::span<const EduSpan> gold, std::span<const EduSpan> predicted) {
  return segmentation_counts(gold, predicted).prf();
}

DiscourseCounts discourse_counts(const JointTree& gold, const JointTree& predicted) {
  require_same_tokens(gold, predicted);
  const auto g = discourse_keys(gold);
  const auto p = discourse_keys(predicted);
  return {multiset_match(g.structure, p.structure), multiset_match(g.nuclearity, p.nuclearity),
          multiset_match(g.relation, p.relation)};
}

DiscourseMetrics discourse_metrics(const JointTree& gold, const JointTree& predicted) {
  const auto counts = discourse_counts(gold, predicted);
  return {counts.structure.prf(), counts.nuclearity.prf(), counts.relation.prf()};
}

DocumentCounts& DocumentCounts::operator+=(const DocumentCounts& other) {
  segmentation += other.segmentation;
  discourse.structure += other.discourse.structure;
  discourse.nuclearity += other.discourse.nuclearity;
  discourse.relation += other.discourse.relation;
  constituency += other.constituency;
  discourse_spans += other.discourse_spans;
  overall += other.overall;
  return *this;
}

DocumentCounts evaluate_document(const JointTree& gold, const JointTree& predicted) {
  require_same_tokens(gold, predicted);
  DocumentCounts counts;
  counts.segmentation = segmentation_counts(extract_edus(gold), extract_edus(predicted));
  counts.discourse = discourse_counts(gold, predicted);
  counts.constituency = span_counts(gold, predicted, SpanLevel::Syntactic);
  counts.discourse_spans = span_counts(gold, predicted, SpanLevel::Discourse);
  counts.overall = span_counts(gold, predicted, SpanLevel::All);
  return counts;
}

EvaluationReport evaluate_corpus(std::span<const JointTree> gold, std::span<const JointTree> predicted) {
  if (gold.size() != predicted.size()) {
    throw std::invalid_argument("gold has " + std::to_string(gold.size()) + " trees, predictions " +
                                std::to_string(predicted.size()));
  }
  EvaluationReport report;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    report.documents.push_back(evaluate_document(gold[i], predicted[i]));
    report.corpus += report.documents.back();
  }
  return report;
}

namespace {

nlohmann::json record(const DocumentCounts& counts) {
  nlohmann::json out = nlohmann::json::object();
  auto put = [&](const std::string& prefix, const MatchCounts& c) {
    const PRF prf = c.prf();
    out[prefix + "_p"] = 100.0 * prf.precision;
    out[prefix + "_r"] = 100.0 * prf.recall;
    out[prefix + "_f1"] = 100.0 * prf.f1;
  };
  put("seg", counts.segmentation);
  put("struct", counts.discourse.structure);
  put("nuc", counts.discourse.nuclearity);
  put("rel", counts.discourse.relation);
  put("const", counts.constituency);
  put("disc", counts.discourse_spans);
  put("overall", counts.overall);
  return out;
}

}  // namespace

std::string report_json(const EvaluationReport& report) {
  nlohmann::json out;
  out["documents"] = nlohmann::json::array();
  for (const auto& doc : report.documents) out["documents"].push_back(record(doc));
  out["corpus"] = record(report.corpus);
  return out.dump(2);
}

}  // namespace jointparse
