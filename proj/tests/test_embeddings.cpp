#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "testing.hpp"
#include "xner/error.hpp"

using namespace xner;

namespace {

EmbeddingSet parse(const std::string& text, std::size_t max_vocab = kDefaultMaxVocab) {
  std::istringstream in(text);
  return read_embeddings(in, "fixture.vec", max_vocab);
}

const char* kAbc = "3 2\na 1 0\nb 0 1\nc 1 1\n";

}  // namespace

TEST(Embeddings, TruncatesAtMaxVocab) {
  EmbeddingSet e = parse(kAbc, 2);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e.dim(), 2u);
  EXPECT_EQ(e.vocab.word(0), "a");
  EXPECT_EQ(e.vocab.word(1), "b");
  EXPECT_FALSE(e.vocab.contains("c"));
}

TEST(Embeddings, KeepsAllRowsWhenMaxVocabIsLarge) {
  EmbeddingSet e = parse(kAbc, 10);
  EXPECT_EQ(e.size(), 3u);
  EXPECT_DOUBLE_EQ(e.matrix(2, 1), 1.0);
  EXPECT_FALSE(e.normalized);
}

TEST(Embeddings, HeaderIsOptional) {
  EmbeddingSet e = parse("a 1 0\nb 0 1\n");
  EXPECT_EQ(e.size(), 2u);
  EXPECT_EQ(e.dim(), 2u);
}

TEST(Embeddings, ShortRowIsAParseErrorAtThatLine) {
  try {
    parse("2 2\na 1 0\nb 1.0\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("fixture.vec:3"), std::string::npos);
  }
}

TEST(Embeddings, NonNumericAndDuplicateRowsAreRejected) {
  EXPECT_THROW(parse("a 1 x\n"), ParseError);
  EXPECT_THROW(parse("a 1 nan\n"), ParseError);
  try {
    parse("a 1 0\nb 0 1\na 2 2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Embeddings, NormalizeRowsIsPure) {
  EmbeddingSet e = parse("a 3 4\nb 1 0\n");
  EmbeddingSet n = normalize_rows(e);
  EXPECT_DOUBLE_EQ(n.matrix(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(n.matrix(0, 1), 0.8);
  EXPECT_DOUBLE_EQ(n.matrix(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(n.matrix(1, 1), 0.0);
  EXPECT_TRUE(n.normalized);
  EXPECT_DOUBLE_EQ(e.matrix(0, 0), 3.0);
  EXPECT_FALSE(e.normalized);
}

TEST(Embeddings, ZeroRowNormalizationNamesTheWord) {
  EmbeddingSet e = parse("ok 1 0\nnull 0 0\n");
  try {
    normalize_rows(e);
    FAIL();
  } catch (const DataError& err) {
    EXPECT_NE(std::string(err.what()).find("null"), std::string::npos);
  }
}

TEST(Embeddings, OovVectorBounds) {
  EXPECT_NEAR(oov_bound(100), 0.17320508, 5e-9);
  EXPECT_DOUBLE_EQ(oov_bound(3), 1.0);
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    RowVector v = oov_vector(100, rng);
    ASSERT_EQ(v.size(), 100);
    EXPECT_LE(v.cwiseAbs().maxCoeff(), 0.17320508075688773);
    RowVector w = oov_vector(3, rng);
    EXPECT_LE(w.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Embeddings, OovVectorIsSeedDeterministic) {
  std::mt19937_64 a(11), b(11);
  EXPECT_EQ(oov_vector(20, a), oov_vector(20, b));
}

TEST(Embeddings, LookupFallsBackToLowercase) {
  EmbeddingSet e = parse("paris 1 0\nParis 0 1\nberlin 1 1\n");
  EXPECT_EQ(e.lookup("Paris"), 1u);
  EXPECT_EQ(e.lookup("BERLIN"), 2u);
  EXPECT_FALSE(e.lookup("rome").has_value());
}

TEST(Embeddings, WriteReadRoundTripIsExact) {
  std::mt19937_64 rng(3);
  EmbeddingSet e;
  e.vocab = Vocabulary({"x", "y", "z"});
  e.matrix = testutil::random_matrix(3, 4, rng);
  std::ostringstream out;
  write_embeddings(e, out);
  EmbeddingSet back = parse(out.str());
  EXPECT_EQ(back.vocab.words(), e.vocab.words());
  EXPECT_EQ(back.matrix, e.matrix);
  std::ostringstream again;
  write_embeddings(back, again);
  EXPECT_EQ(again.str(), out.str());
}

TEST(Embeddings, VocabularyRejectsDuplicates) {
  Vocabulary v;
  EXPECT_TRUE(v.add("a"));
  EXPECT_FALSE(v.add("a"));
  EXPECT_EQ(v.size(), 1u);
  EXPECT_THROW(Vocabulary({"a", "b", "a"}), DataError);
}

TEST(Embeddings, ProjectChecksDimensions) {
  EmbeddingSet e = parse("a 1 2\n");
  Matrix m = Matrix::Identity(3, 3);
  EXPECT_THROW(project(e, m), ConfigError);
  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  EXPECT_EQ(project(e, swap).matrix(0, 0), 2.0);
}
