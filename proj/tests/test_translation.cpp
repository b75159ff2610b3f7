#include <gtest/gtest.h>

#include <sstream>

#include "testing.hpp"
#include "xner/error.hpp"
#include "xner/translation.hpp"

using namespace xner;

namespace {

LabeledCorpus one_sentence(std::vector<std::string> tokens, std::vector<std::string> tags) {
  LabeledCorpus c;
  c.sentences.push_back({std::move(tokens), std::move(tags)});
  return c;
}

}  // namespace

TEST(CapitalizationStats, Counting) {
  CapitalizationStats s = build_capitalization_stats({"Haus", "haus", "Haus", "der"});
  EXPECT_DOUBLE_EQ(*s.probability("haus"), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*s.probability("der"), 0.0);
  EXPECT_FALSE(s.probability("katze").has_value());
  EXPECT_THROW(build_capitalization_stats({}), DataError);
}

TEST(CapitalizationStats, FileRoundTrip) {
  CapitalizationStats s = build_capitalization_stats({"Haus", "haus", "Haus", "der", "Über"});
  std::ostringstream out;
  write_capitalization_stats(s, out, {"seed=1"});
  std::istringstream in(out.str());
  CapitalizationStats back = read_capitalization_stats(in, "stats");
  EXPECT_EQ(*back.probability("haus"), *s.probability("haus"));
  EXPECT_EQ(*back.probability("über"), 1.0);
  std::ostringstream again;
  write_capitalization_stats(back, again, {"seed=1"});
  EXPECT_EQ(again.str(), out.str());
}

TEST(ApplyCapitalization, CopiesSourcePattern) {
  EXPECT_EQ(apply_capitalization("London", "londres", nullptr), "Londres");
  EXPECT_EQ(apply_capitalization("the", "el", nullptr), "el");
  EXPECT_EQ(apply_capitalization("EU", "ue", nullptr), "UE");
}

TEST(ApplyCapitalization, StatisticsOverrideAboveThreshold) {
  CapitalizationStats s;
  s.set("haus", {7, 10});
  s.set("gut", {6, 10});
  EXPECT_EQ(apply_capitalization("house", "haus", &s, 0.6), "Haus");
  // Exactly at the threshold is not "greater than".
  EXPECT_EQ(apply_capitalization("Good", "gut", &s, 0.6), "gut");
  // Unknown to the statistics: source pattern.
  EXPECT_EQ(apply_capitalization("Cat", "katze", &s, 0.6), "Katze");
}

TEST(TranslateCorpus, CopiesTagsAndPassesOovThrough) {
  Lexicon lex;
  lex.add("eu", "ue");
  lex.add("rejects", "rechaza");
  lex.add("call", "llamada");
  LabeledCorpus c = one_sentence({"EU", "rejects", "call", "Fischler"}, {"B-ORG", "O", "O", "B-PER"});
  LabeledCorpus t = translate_corpus(c, lex, CapsPolicy{}, TranslationMode::translate);
  EXPECT_EQ(t.sentences[0].tokens, (std::vector<std::string>{"UE", "rechaza", "llamada", "Fischler"}));
  EXPECT_EQ(t.sentences[0].tags, c.sentences[0].tags);
}

TEST(TranslateCorpus, NonTranslateModesAreIdentity) {
  Lexicon lex;
  lex.add("a", "b");
  LabeledCorpus c = one_sentence({"a", "A"}, {"O", "B-X"});
  EXPECT_EQ(translate_corpus(c, lex, CapsPolicy{}, TranslationMode::common_space), c);
  EXPECT_EQ(translate_corpus(c, lex, CapsPolicy{}, TranslationMode::replace), c);
}

TEST(TranslateCorpus, MismatchedLengthsAreRejected) {
  LabeledCorpus c = one_sentence({"a", "b"}, {"O"});
  EXPECT_THROW(translate_corpus(c, Lexicon{}, CapsPolicy{}, TranslationMode::translate), DataError);
}

TEST(TranslateCorpus, TableOverloadUsesVocabularies) {
  Matrix x(2, 2), y(2, 2);
  x << 1, 0, 0, 1;
  y << 0, 1, 1, 0;
  Vocabulary vs({"house", "london"}), vt({"haus", "londres"});
  TranslationTable t = build_translation_table(x, y, 1);
  EXPECT_EQ(t.entries[0].target, 1u);
  LabeledCorpus c = one_sentence({"London", "house"}, {"B-LOC", "O"});
  LabeledCorpus out = translate_corpus(c, t, vs, vt, CapsPolicy{}, TranslationMode::translate);
  EXPECT_EQ(out.sentences[0].tokens, (std::vector<std::string>{"Haus", "londres"}));
}

TEST(Lexicon, LowercaseFallbackAndFile) {
  std::istringstream in("# header\nParis Paris 0.5\nthe el 0.9\n");
  Lexicon lex = read_lexicon(in, "table");
  EXPECT_EQ(lex.size(), 2u);
  EXPECT_EQ(*lex.translate("The"), "el");
  EXPECT_EQ(*lex.translate("Paris"), "Paris");
  EXPECT_FALSE(lex.translate("xyz").has_value());
  std::istringstream bad("a b\n");
  EXPECT_THROW(read_lexicon(bad, "table"), ParseError);
}

TEST(TranslationTable, FileFormat) {
  Matrix e = Matrix::Identity(2, 2);
  TranslationTable t = build_translation_table(e, e, 1);
  std::ostringstream out;
  write_translation_table(t, Vocabulary({"a", "b"}), Vocabulary({"x", "y"}), out, {"seed=3"});
  EXPECT_EQ(out.str(), "# seed=3\na x 0.000000\nb y 0.000000\n");
}

TEST(TranslationMode, Parsing) {
  EXPECT_EQ(parse_translation_mode("common-space"), TranslationMode::common_space);
  EXPECT_EQ(parse_translation_mode("replace"), TranslationMode::replace);
  EXPECT_EQ(to_string(TranslationMode::common_space), "common-space");
  EXPECT_THROW(parse_translation_mode("bogus"), ConfigError);
}

TEST(SubstituteEmbeddings, SourceWordsTakeTargetVectors) {
  EmbeddingSet tgt;
  tgt.vocab = Vocabulary({"perro", "gato"});
  tgt.matrix.resize(2, 2);
  tgt.matrix << 1, 2, 3, 4;
  Lexicon lex;
  lex.add("dog", "perro");
  lex.add("cat", "gato");
  EmbeddingSet s = substitute_embeddings(Vocabulary({"cat", "dog", "bird"}), lex, tgt);
  EXPECT_EQ(s.vocab.words(), (std::vector<std::string>{"cat", "dog"}));
  EXPECT_EQ(s.matrix.row(0), tgt.matrix.row(1));
  EXPECT_EQ(s.matrix.row(1), tgt.matrix.row(0));
}
