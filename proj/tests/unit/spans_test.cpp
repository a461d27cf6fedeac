#include <algorithm>

#include <gtest/gtest.h>

#include "jointparse/corpus_stats.hpp"
#include "jointparse/joint_format.hpp"
#include "jointparse/spans.hpp"

namespace jointparse {
namespace {

TEST(LabeledSpans, OneSpanPerNode) {
  const auto spans = labeled_spans(read_joint("(A (B x) y)"));
  EXPECT_EQ(spans, (std::vector<LabeledSpan>{{0, 1, "B"}, {0, 2, "A"}}));
}

TEST(LabeledSpans, UnaryChainsCollapse) {
  EXPECT_EQ(labeled_spans(read_joint("(A (B x y))")), (std::vector<LabeledSpan>{{0, 2, "A+B"}}));
  EXPECT_EQ(labeled_spans(read_joint("(S (VP (VB a)))")), (std::vector<LabeledSpan>{{0, 1, "S+VP+VB"}}));
}

TEST(LabeledSpans, FigureOneRootAndPurposeSpans) {
  const auto tree = read_joint(
      "(Background-> (S (NNP Costa) (NNP Rica)) (<-Purpose (S (CC but) (NN plan)) (SBAR (IN in) (NN order))))");
  const auto spans = labeled_spans(tree);
  EXPECT_NE(std::find(spans.begin(), spans.end(), LabeledSpan{0, 6, "Background->"}), spans.end());
  EXPECT_NE(std::find(spans.begin(), spans.end(), LabeledSpan{2, 6, "<-Purpose"}), spans.end());
  EXPECT_TRUE(is_laminar(spans));
}

TEST(ExtractEdus, PurelySyntacticIsOneEdu) {
  EXPECT_EQ(extract_edus(read_joint("(S (NN a) (NN b) (NN c) (NN d) (NN e))")), (std::vector<EduSpan>{{0, 5}}));
}

TEST(ExtractEdus, ChildrenOfDiscourseNodes) {
  const auto tree = read_joint("(<-Elaboration (S (NN a)) (List (S (NN b) (NN c)) (NP (NN d)) (S (NN e))))");
  EXPECT_EQ(extract_edus(tree), (std::vector<EduSpan>{{0, 1}, {1, 3}, {3, 4}, {4, 5}}));
}

TEST(Tiling, DetectsGapsAndOverlap) {
  EXPECT_TRUE(tiles(std::vector<EduSpan>{{0, 2}, {2, 5}}, 5));
  EXPECT_FALSE(tiles(std::vector<EduSpan>{{0, 2}, {3, 5}}, 5));
  EXPECT_FALSE(tiles(std::vector<EduSpan>{{0, 3}, {2, 5}}, 5));
  EXPECT_FALSE(tiles(std::vector<EduSpan>{{0, 2}}, 5));
}

TEST(Laminar, CrossingSpans) {
  EXPECT_FALSE(is_laminar(std::vector<LabeledSpan>{{0, 2, "A"}, {1, 3, "B"}}));
  EXPECT_TRUE(is_laminar(std::vector<LabeledSpan>{{0, 3, "A"}, {1, 3, "B"}, {0, 1, "C"}}));
}

TEST(CorpusStats, EmptyIsAllZero) {
  const auto stats = corpus_stats({});
  EXPECT_EQ(stats.trees, 0);
  EXPECT_EQ(stats.tokens, 0);
  EXPECT_EQ(stats.min_length, 0);
  EXPECT_EQ(stats.max_length, 0);
  EXPECT_TRUE(stats.histogram.empty());
}

TEST(CorpusStats, CountsAndBuckets) {
  const std::vector<JointTree> trees{read_joint("(S (NN a) (NN b))"), read_joint("(S (NN a) (NN b) (NN c))"),
                                     read_joint("(S (NN a))")};
  const auto stats = corpus_stats(trees, 2);
  EXPECT_EQ(stats.trees, 3);
  EXPECT_EQ(stats.tokens, 6);
  EXPECT_EQ(stats.min_length, 1);
  EXPECT_EQ(stats.max_length, 3);
  EXPECT_EQ(stats.histogram, (std::map<int, int>{{0, 1}, {2, 2}}));
}

}  // namespace
}  // namespace jointparse
