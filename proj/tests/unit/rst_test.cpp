#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "jointparse/errors.hpp"
#include "jointparse/joint_format.hpp"
#include "jointparse/ptb.hpp"
#include "jointparse/rst.hpp"
#include "jointparse/spans.hpp"

namespace jointparse {
namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const std::filesystem::path kData = JOINTPARSE_TEST_DATA;

std::string fixture(const std::string& relative) { return slurp(kData / relative); }

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

TEST(ReadRst, FigureOneHasTwoInternalNodes) {
  const auto rst = read_rst(fixture("rst/wsj_fig1.out.dis"));
  EXPECT_EQ(count_edus(rst.root), 3);
  ASSERT_EQ(rst.root.children.size(), 2u);
  EXPECT_EQ(rst.root.children[0].role, Role::Satellite);
  EXPECT_EQ(rst.root.children[0].relation, "Background");
  const auto& right = rst.root.children[1];
  EXPECT_FALSE(right.is_edu());
  EXPECT_EQ(right.children[1].relation, "Purpose");
  EXPECT_EQ(right.children[0].text, "but the debt plan was rushed to completion");
}

TEST(ReadRst, FigureTwoHasThreeWayList) {
  const auto rst = read_rst(fixture("rst/wsj_fig2.out.dis"));
  EXPECT_EQ(count_edus(rst.root), 4);
  const auto& satellite = rst.root.children[1];
  EXPECT_EQ(satellite.role, Role::Satellite);
  EXPECT_EQ(satellite.relation, "Elaboration");
  ASSERT_EQ(satellite.children.size(), 3u);
  for (const auto& child : satellite.children) {
    EXPECT_EQ(child.role, Role::Nucleus);
    EXPECT_EQ(child.relation, "List");
  }
}

TEST(ReadRst, SingleEdu) {
  const auto rst = read_rst("( Root (leaf 1) (text _!One unit only._!) )");
  EXPECT_TRUE(rst.root.is_edu());
  EXPECT_EQ(count_edus(rst.root), 1);
  const auto skeleton = convert_rst(rst);
  EXPECT_TRUE(skeleton.root.is_leaf());
}

TEST(ReadRst, TwoSatellitesIsStructuralError) {
  EXPECT_THROW(read_rst("( Root (span 1 2)"
                        "  ( Satellite (leaf 1) (rel2par Background) (text _!a_!) )"
                        "  ( Satellite (leaf 2) (rel2par Purpose) (text _!b_!) ) )"),
               StructureError);
}

TEST(ReadRst, MissingRelationIsAnError) {
  EXPECT_THROW(read_rst("( Root (span 1 2)"
                        "  ( Nucleus (leaf 1) (rel2par span) (text _!a_!) )"
                        "  ( Satellite (leaf 2) (text _!b_!) ) )"),
               StructureError);
}

TEST(ReadRst, MalformedIsParseError) {
  EXPECT_THROW(read_rst("( Root (span 1 2)"), ParseError);
}

TEST(ConvertRst, FigureOneSkeleton) {
  const auto skeleton = convert_rst(read_rst(fixture("rst/wsj_fig1.out.dis")));
  EXPECT_EQ(render_label(skeleton.root.label), "Background->");
  ASSERT_EQ(skeleton.root.children.size(), 2u);
  EXPECT_TRUE(skeleton.root.children[0].is_leaf());
  EXPECT_EQ(render_label(skeleton.root.children[1].label), "<-Purpose");
  EXPECT_EQ(skeleton.tokens.size(), 3u);
}

TEST(ConvertRst, FigureTwoSkeletonKeepsListArity) {
  const auto skeleton = convert_rst(read_rst(fixture("rst/wsj_fig2.out.dis")));
  EXPECT_EQ(render_label(skeleton.root.label), "<-Elaboration");
  const auto& list = skeleton.root.children[1];
  EXPECT_EQ(render_label(list.label), "List");
  EXPECT_EQ(list.children.size(), 3u);
  // Paragraph markers are not part of the EDU text.
  EXPECT_EQ(skeleton.tokens[3], "and ASA Ltd. jumped 3 5/8 to 49 5/8.");
}

TEST(AlignEdus, MapsTextToTokenRanges) {
  const std::vector<std::string> texts{"Hecla rose 5/8;", "and ``ASA'' jumped."};
  const std::vector<std::string> tokens{"Hecla", "rose", "5/8", ";", "and", "\"", "ASA", "\"", "jumped", "."};
  EXPECT_EQ(align_edus(texts, tokens), (std::vector<EduSpan>{{0, 4}, {4, 10}}));
}

TEST(AlignEdus, BoundaryInsideTokenFails) {
  const std::vector<std::string> texts{"ab", "c"};
  const std::vector<std::string> tokens{"abc"};
  EXPECT_THROW(align_edus(texts, tokens), AlignmentError);
}

TEST(AlignEdus, TextMismatchFails) {
  const std::vector<std::string> texts{"a b"};
  const std::vector<std::string> tokens{"a", "c"};
  EXPECT_THROW(align_edus(texts, tokens), AlignmentError);
}

TEST(Splice, FigureOneMatchesExpectedTree) {
  const auto tree = convert_document(fixture("rst/wsj_fig1.out.dis"), fixture("ptb/wsj_fig1.mrg"));
  EXPECT_EQ(write_joint(tree), first_line(fixture("expected/fig1.joint")));
  EXPECT_EQ(extract_edus(tree), (std::vector<EduSpan>{{0, 8}, {8, 16}, {16, 24}}));
}

TEST(Splice, FigureTwoMatchesExpectedTree) {
  const auto tree = convert_document(fixture("rst/wsj_fig2.out.dis"), fixture("ptb/wsj_fig2.mrg"));
  EXPECT_EQ(write_joint(tree), first_line(fixture("expected/fig2.joint")));
  EXPECT_EQ(extract_edus(tree).size(), 4u);
}

TEST(Splice, MultipleSubtreeEduTakesCommonAncestorLabel) {
  // (A B C D) with EDUs B and C-D related by B -Purpose-> C-D.
  const auto ptb = read_ptb("(A (B b) (C c) (D d))");
  JointTree skeleton;
  skeleton.tokens = {"b", "c d"};
  skeleton.root = Node::internal(Label::discourse("Purpose", Nuclearity::SatelliteThenNucleus),
                                 {Node::leaf(0), Node::leaf(1)});
  const auto tree = splice_edus(skeleton, ptb);
  EXPECT_EQ(write_joint(tree), "(Purpose-> (B b) (A (C c) (D d)))");
}

TEST(Splice, SingleEduCoveringSentenceIsUnchanged) {
  const auto ptb = read_ptb("(S (NP (NN a)) (VP (VB b)))");
  JointTree skeleton;
  skeleton.tokens = {"a b"};
  skeleton.root = Node::leaf(0);
  EXPECT_EQ(write_joint(splice_edus(skeleton, ptb)), "(S (NP (NN a)) (VP (VB b)))");
}

TEST(Splice, EduAcrossSentencesIsAlignmentError) {
  const auto ptb = read_ptb("(S (NN a) (NN b))\n(S (NN c))");
  JointTree skeleton;
  skeleton.tokens = {"a", "b c"};
  skeleton.root = Node::internal(Label::discourse("Elaboration", Nuclearity::NucleusThenSatellite),
                                 {Node::leaf(0), Node::leaf(1)});
  EXPECT_THROW(splice_edus(skeleton, ptb), AlignmentError);
}

TEST(Splice, MisalignedDocumentIsRejected) {
  const std::string rst = fixture("rst/wsj_fig1.out.dis");
  std::string bad = rst;
  bad.replace(bad.find("debt"), 4, "loan");
  EXPECT_THROW(convert_document(bad, fixture("ptb/wsj_fig1.mrg")), AlignmentError);
}

}  // namespace
}  // namespace jointparse
