#include <gtest/gtest.h>

#include "xner/text.hpp"

using namespace xner::text;

TEST(Text, Utf8RoundTrip) {
  const std::string s = "Zürich ĳssel Ωmega 東京";
  EXPECT_EQ(encode_utf8(decode_utf8(s)), s);
  EXPECT_EQ(decode_utf8("é").size(), 1u);
}

TEST(Text, MalformedBytesBecomeReplacementCharacter) {
  const std::u32string cps = decode_utf8(std::string("a\xC3", 2));
  ASSERT_EQ(cps.size(), 2u);
  EXPECT_EQ(cps[1], char32_t{0xFFFD});
}

TEST(Text, CaseMappingCoversNonAscii) {
  EXPECT_EQ(lowercase("ÉCOLE"), "école");
  EXPECT_EQ(uppercase("straße"), "STRAßE");
  EXPECT_EQ(capitalize_first("über"), "Über");
}

TEST(Text, CasePatterns) {
  EXPECT_EQ(case_pattern("London"), CasePattern::initial);
  EXPECT_EQ(case_pattern("EU"), CasePattern::all_caps);
  EXPECT_EQ(case_pattern("the"), CasePattern::lower);
  EXPECT_EQ(case_pattern("iPhone"), CasePattern::lower);
  EXPECT_EQ(case_pattern("A"), CasePattern::initial);
  EXPECT_EQ(case_pattern("1984"), CasePattern::lower);
  EXPECT_EQ(case_pattern("\"Quote"), CasePattern::initial);
}

TEST(Text, ApplyPattern) {
  EXPECT_EQ(apply_pattern("londres", CasePattern::initial), "Londres");
  EXPECT_EQ(apply_pattern("ue", CasePattern::all_caps), "UE");
  EXPECT_EQ(apply_pattern("El", CasePattern::lower), "el");
}

TEST(Text, SplitAndChomp) {
  EXPECT_EQ(split_ws("  a\tb  c \r\n"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(split_ws("   ").empty());
  EXPECT_EQ(chomp("x y\r\n"), "x y");
}
