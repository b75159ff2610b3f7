#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "conlleval_oracle.hpp"
#include "xner/error.hpp"
#include "xner/evaluation.hpp"

using namespace xner;
using namespace xner::testutil;

namespace {

LabeledCorpus corpus_of(std::vector<Tags> tags) {
  LabeledCorpus c;
  for (auto& t : tags) c.sentences.push_back({Tags(t.size(), "w"), t});
  return c;
}

}  // namespace

TEST(Iob1ToBio, TableMatchesHandAndConllevalOracle) {
  ASSERT_EQ(kIob1Table.size(), 20u);
  for (std::size_t k = 0; k < kIob1Table.size(); ++k) {
    const auto& c = kIob1Table[k];
    EXPECT_EQ(iob1_to_bio(c.iob1), c.bio) << "case " << k;
    EXPECT_EQ(extract_spans(iob1_to_bio(c.iob1)), conlleval_chunks(c.iob1)) << "case " << k;
  }
}

TEST(Iob1ToBio, RandomSequencesAgreeWithConlleval) {
  std::mt19937_64 rng(12);
  const Tags alphabet = {"O", "I-PER", "B-PER", "I-LOC", "B-LOC"};
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1), len(0, 8);
  for (int rep = 0; rep < 2000; ++rep) {
    Tags t(len(rng));
    for (auto& x : t) x = alphabet[pick(rng)];
    ASSERT_EQ(extract_spans(iob1_to_bio(t)), conlleval_chunks(t));
  }
}

TEST(ExtractSpans, Definitions) {
  EXPECT_EQ(extract_spans({"B-PER", "I-PER", "O", "B-LOC"}), (std::vector<Span>{{0, 2, "PER"}, {3, 4, "LOC"}}));
  EXPECT_TRUE(extract_spans({"O", "O"}).empty());
  std::size_t ill = 0;
  EXPECT_EQ(extract_spans({"I-LOC"}, &ill), (std::vector<Span>{{0, 1, "LOC"}}));
  EXPECT_EQ(ill, 1u);
}

TEST(ExtractSpans, CanonicalBioRoundTrip) {
  std::mt19937_64 rng(3);
  const Tags alphabet = {"O", "I-A", "B-A", "I-B", "B-B"};
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int rep = 0; rep < 1000; ++rep) {
    Tags t(7);
    for (auto& x : t) x = alphabet[pick(rng)];
    const auto spans = extract_spans(t);
    EXPECT_EQ(extract_spans(spans_to_bio(spans, t.size())), spans);
  }
}

TEST(SpanF1, SelfComparisonIsPerfect) {
  LabeledCorpus g = corpus_of({{"B-PER", "I-PER", "O"}, {"B-LOC"}});
  EvalReport r = span_f1(g, g);
  EXPECT_DOUBLE_EQ(r.precision(), 1.0);
  EXPECT_DOUBLE_EQ(r.recall(), 1.0);
  EXPECT_DOUBLE_EQ(r.f1(), 1.0);
}

TEST(SpanF1, HalfCorrectFixture) {
  LabeledCorpus g = corpus_of({{"B-PER", "O", "B-LOC", "O"}});
  LabeledCorpus p = corpus_of({{"B-PER", "O", "O", "B-ORG"}});
  EvalReport r = span_f1(g, p);
  EXPECT_DOUBLE_EQ(r.precision(), 0.5);
  EXPECT_DOUBLE_EQ(r.recall(), 0.5);
  EXPECT_DOUBLE_EQ(r.f1(), 0.5);
  EXPECT_EQ(r.per_type.at("PER").correct, 1u);
  EXPECT_EQ(r.per_type.at("ORG").predicted, 1u);
}

TEST(SpanF1, BoundaryMismatchIsWrong) {
  LabeledCorpus g = corpus_of({{"B-PER", "I-PER"}});
  LabeledCorpus p = corpus_of({{"B-PER", "O"}});
  EXPECT_DOUBLE_EQ(span_f1(g, p).f1(), 0.0);
}

TEST(SpanF1, AllOPredictionConventions) {
  LabeledCorpus g = corpus_of({{"B-PER", "O"}});
  LabeledCorpus p = corpus_of({{"O", "O"}});
  EvalReport r = span_f1(g, p);
  EXPECT_DOUBLE_EQ(r.precision(), 0.0);
  EXPECT_DOUBLE_EQ(r.recall(), 0.0);
  EXPECT_DOUBLE_EQ(r.f1(), 0.0);
  EXPECT_DOUBLE_EQ(r.token_accuracy(), 0.5);
}

TEST(SpanF1, ShapeMismatchFails) {
  EXPECT_THROW(span_f1(corpus_of({{"O"}}), corpus_of({{"O", "O"}})), DataError);
  EXPECT_THROW(span_f1(corpus_of({{"O"}}), corpus_of({{"O"}, {"O"}})), DataError);
}

TEST(SpanF1, KeyValueReport) {
  LabeledCorpus g = corpus_of({{"B-PER", "O", "B-LOC", "O"}});
  LabeledCorpus p = corpus_of({{"B-PER", "O", "O", "B-ORG"}});
  std::ostringstream out;
  print_report_keyvalue(span_f1(g, p), out);
  EXPECT_NE(out.str().find("f1=0.5"), std::string::npos);
}
