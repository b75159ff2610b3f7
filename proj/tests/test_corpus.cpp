#include <gtest/gtest.h>

#include <sstream>

#include "xner/corpus.hpp"
#include "xner/error.hpp"

using namespace xner;

namespace {

LabeledCorpus parse(const std::string& s) {
  std::istringstream in(s);
  return read_conll(in, "fixture.conll");
}

}  // namespace

TEST(Conll, TwoSentences) {
  LabeledCorpus c = parse("EU B-ORG\nrejects O\n\nPeter B-PER\nBlackburn I-PER\nspoke O\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.sentences[0].size(), 2u);
  EXPECT_EQ(c.sentences[1].size(), 3u);
  EXPECT_EQ(c.sentences[1].tags[1], "I-PER");
  EXPECT_EQ(c.token_count(), 5u);
}

TEST(Conll, DocstartIsSkippedAndMiddleColumnsIgnored) {
  LabeledCorpus c = parse("-DOCSTART- -X- O O\n\nEU NNP I-NP B-ORG\n\n\n");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.sentences[0].tokens[0], "EU");
  EXPECT_EQ(c.sentences[0].tags[0], "B-ORG");
}

TEST(Conll, BadTagNamesLine) {
  try {
    parse("a O\nb X-PER\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse("lonely\n"), ParseError);
  EXPECT_THROW(parse("\n\n"), DataError);
}

TEST(Conll, WriteReadRoundTrip) {
  LabeledCorpus c = parse("a O\nB B-X\n\nc I-Y\n");
  std::ostringstream out;
  write_conll(c, out);
  EXPECT_EQ(out.str(), "a O\nB B-X\n\nc I-Y\n\n");
  EXPECT_EQ(parse(out.str()), c);
}

TEST(Conll, PlainTextGetsOTags) {
  std::istringstream in("hello World\n\nbye\n");
  LabeledCorpus c = read_plain_text(in, "t.txt");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.sentences[0].tags, (std::vector<std::string>{"O", "O"}));
}

TEST(Conll, TagValidity) {
  EXPECT_TRUE(is_valid_tag("O"));
  EXPECT_TRUE(is_valid_tag("B-MISC"));
  EXPECT_FALSE(is_valid_tag("B-"));
  EXPECT_FALSE(is_valid_tag("X-PER"));
  EXPECT_FALSE(is_valid_tag("o"));
}

TEST(Conll, TagsetOrder) {
  LabeledCorpus c = parse("a I-PER\nb O\nc B-LOC\nd B-PER\n");
  EXPECT_EQ(collect_tagset(c), (std::vector<std::string>{"O", "B-LOC", "B-PER", "I-PER"}));
}
