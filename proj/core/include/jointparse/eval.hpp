#pragma once

#include <span>
#include <string>
#include <vector>

#include "jointparse/tree.hpp"

namespace jointparse {

/// Precision, recall and F1 as fractions in [0, 1].
struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Raw counts behind a PRF; summing counts gives the micro-average.
struct MatchCounts {
  long matched = 0;
  long gold = 0;
  long predicted = 0;

  // Both sides empty scores 1 everywhere; otherwise an empty side scores 0.
  PRF prf() const;
  MatchCounts& operator+=(const MatchCounts& other);
  bool operator==(const MatchCounts&) const = default;
};

enum class SpanLevel { All, Syntactic, Discourse };

MatchCounts span_counts(const JointTree& gold, const JointTree& predicted, SpanLevel level);
PRF span_prf(const JointTree& gold, const JointTree& predicted, SpanLevel level);

// Over internal EDU boundaries (EDU starts strictly inside the document).
MatchCounts segmentation_counts(std::span<const EduSpan> gold, std::span<const EduSpan> predicted);
PRF segmentation_f1(std::span<const EduSpan> gold, std::span<const EduSpan> predicted);

struct DiscourseCounts {
  MatchCounts structure;   // span only
  MatchCounts nuclearity;  // span + direction / multi-nuclear form
  MatchCounts relation;    // span + form + relation name
};

struct DiscourseMetrics {
  PRF structure;
  PRF nuclearity;
  PRF relation;
};

DiscourseCounts discourse_counts(const JointTree& gold, const JointTree& predicted);
DiscourseMetrics discourse_metrics(const JointTree& gold, const JointTree& predicted);

struct DocumentCounts {
  MatchCounts segmentation;
  DiscourseCounts discourse;
  MatchCounts constituency;
  MatchCounts discourse_spans;
  MatchCounts overall;

  DocumentCounts& operator+=(const DocumentCounts& other);
};

DocumentCounts evaluate_document(const JointTree& gold, const JointTree& predicted);

struct EvaluationReport {
  std::vector<DocumentCounts> documents;
  DocumentCounts corpus;  // micro-average over documents
};

EvaluationReport evaluate_corpus(std::span<const JointTree> gold, std::span<const JointTree> predicted);

// {"documents": [record...], "corpus": record}; every record has exactly the
// fields seg_*, struct_*, nuc_*, rel_*, const_*, disc_*, overall_* with
// suffixes p / r / f1, as percentages.
std::string report_json(const EvaluationReport& report);

}  // namespace jointparse
