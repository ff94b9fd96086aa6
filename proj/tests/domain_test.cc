/*
 * Copyright 2026 The nleu Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "nleu/domain.h"

#include <gtest/gtest.h>

#include <random>

#include "nleu/errors.h"

namespace nleu {
namespace {

Answer Num(std::string_view s) { return *ParseAnswer(s, DatasetKind::kMathWord); }

TEST(NormalizeToken, CasePunctuationAndWhitespace) {
  EXPECT_EQ(NormalizeToken("Peaches,"), "peaches");
  EXPECT_EQ(NormalizeToken("peaches"), "peaches");
  EXPECT_EQ(NormalizeToken("  Steven  "), "steven");
  EXPECT_EQ(NormalizeToken("New   York!"), "new york");
  EXPECT_EQ(NormalizeToken("..."), "");
}

TEST(NormalizeToken, Idempotent) {
  std::mt19937 rng(1);
  const std::string alphabet = "aB ,.!?'\t-Zz09\"";
  for (int trial = 0; trial < 1000; ++trial) {
    std::string s(std::uniform_int_distribution<int>(0, 12)(rng), ' ');
    for (char& c : s) {
      c = alphabet[std::uniform_int_distribution<size_t>(0, alphabet.size() - 1)(rng)];
    }
    const std::string once = NormalizeToken(s);
    EXPECT_EQ(NormalizeToken(once), once) << s;
  }
}

TEST(NormalizedWords, DropsEmptyPieces) {
  EXPECT_EQ(NormalizedWords("Jake has 17 peaches ."),
            (std::vector<std::string>{"jake", "has", "17", "peaches"}));
}

TEST(DatasetKind, NamesRoundTrip) {
  for (auto k : {DatasetKind::kMathWord, DatasetKind::kYesNo,
                 DatasetKind::kPlausibility}) {
    EXPECT_EQ(ParseDatasetKind(DatasetKindName(k)), k);
  }
  EXPECT_EQ(ParseDatasetKind("yes_no"), DatasetKind::kYesNo);
  EXPECT_FALSE(ParseDatasetKind("trivia").has_value());
  EXPECT_EQ(ParseExplanationMode("cot"), ExplanationMode::kChainOfThought);
  EXPECT_EQ(ExplanationModeName(ExplanationMode::kTokenImportance), "ti");
}

TEST(Decimal, Canonicalization) {
  EXPECT_EQ(Decimal::Parse("28")->ToString(), "28");
  EXPECT_EQ(Decimal::Parse("028.0")->ToString(), "28");
  EXPECT_EQ(Decimal::Parse("-0.50")->ToString(), "-0.5");
  EXPECT_EQ(Decimal::Parse("-0")->ToString(), "0");
  EXPECT_EQ(Decimal::Parse("1,234.50")->ToString(), "1234.5");
  EXPECT_FALSE(Decimal::Parse("12,34").has_value());
  EXPECT_FALSE(Decimal::Parse("abc").has_value());
  EXPECT_FALSE(Decimal::Parse("").has_value());
}

TEST(AnswersEqual, Examples) {
  EXPECT_TRUE(AnswersEqual(Num("28"), Num("28")));
  EXPECT_TRUE(AnswersEqual(Num("28"), Num("28.0")));
  EXPECT_FALSE(AnswersEqual(Answer{YesNo{true}}, Num("1")));
  EXPECT_FALSE(AnswersEqual(Num("28"), Num("28.01")));
}

TEST(AnswersEqual, EquivalenceRelation) {
  const std::vector<std::string> texts = {"28", "28.0", "028", "1,000", "1000",
                                          "0.5", ".5", "-3", "7"};
  std::vector<Answer> answers;
  for (const auto& t : texts) answers.push_back(Num(t));
  answers.push_back(Answer{YesNo{true}});
  answers.push_back(Answer{Plausibility::kPlausible});
  for (const auto& a : answers) {
    EXPECT_TRUE(AnswersEqual(a, a));
    for (const auto& b : answers) {
      EXPECT_EQ(AnswersEqual(a, b), AnswersEqual(b, a));
      for (const auto& c : answers) {
        if (AnswersEqual(a, b) && AnswersEqual(b, c)) {
          EXPECT_TRUE(AnswersEqual(a, c));
        }
      }
    }
  }
}

TEST(ParseAnswer, PerKind) {
  EXPECT_EQ(AnswerToString(Num("The answer is 1,250 dollars")), "1250");
  EXPECT_EQ(ParseAnswer("Yes, definitely", DatasetKind::kYesNo),
            Answer{YesNo{true}});
  EXPECT_EQ(ParseAnswer("no", DatasetKind::kYesNo), Answer{YesNo{false}});
  EXPECT_EQ(ParseAnswer("Implausible.", DatasetKind::kPlausibility),
            Answer{Plausibility::kImplausible});
  EXPECT_FALSE(ParseAnswer("maybe", DatasetKind::kYesNo).has_value());
  EXPECT_FALSE(ParseAnswer("none", DatasetKind::kMathWord).has_value());
  EXPECT_EQ(AnswerKind(Answer{YesNo{false}}), DatasetKind::kYesNo);
}

TEST(ConfidenceScore, RangeAndPercent) {
  EXPECT_THROW(ConfidenceScore(1.5), Error);
  EXPECT_THROW(ConfidenceScore(-0.1), Error);
  bool clamped = false;
  EXPECT_EQ(ConfidenceScore::FromPercent(90, &clamped).value(), 0.9);
  EXPECT_FALSE(clamped);
  EXPECT_EQ(ConfidenceScore::FromPercent(150, &clamped).value(), 1.0);
  EXPECT_TRUE(clamped);
  EXPECT_EQ(ConfidenceScore::FromPercent(-5, &clamped).value(), 0.0);
  EXPECT_TRUE(clamped);
}

TEST(TokenImportanceExplanation, OrderingAndTies) {
  const TokenImportanceExplanation ti({{"Jake", 0.2}, {"Steven", 0.2},
                                       {"peaches", 0.6}, {"jake", 0.9},
                                       {"!!", 0.5}});
  ASSERT_EQ(ti.size(), 3u);
  EXPECT_EQ(ti.entries()[0], (TokenWeight{"peaches", 0.6}));
  EXPECT_EQ(ti.entries()[1], (TokenWeight{"jake", 0.2}));
  EXPECT_EQ(ti.entries()[2], (TokenWeight{"steven", 0.2}));
  EXPECT_EQ(ti.TopTokens(2), (std::vector<std::string>{"peaches", "jake"}));
  EXPECT_EQ(ti.TopTokens(10).size(), 3u);
  EXPECT_THROW(TokenImportanceExplanation({{"a", -1.0}}), Error);
}

TEST(TokenImportanceExplanation, WeightsAndRanking) {
  const auto w = TokenImportanceExplanation::FromWeights(
      {{"a", 30}, {"b", 10}});
  EXPECT_EQ(w.entries()[0].weight, 0.75);
  EXPECT_EQ(w.entries()[1].weight, 0.25);
  const auto r = TokenImportanceExplanation::FromRanking({"x", "y", "x", "z"});
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r.TopTokens(3), (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_DOUBLE_EQ(r.entries()[0].weight, 3.0 / 6.0);
  EXPECT_DOUBLE_EQ(r.entries()[2].weight, 1.0 / 6.0);
}

TEST(TokenImportanceExplanation, SortedAfterRandomConstruction) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenWeight> entries;
    const int n = std::uniform_int_distribution<int>(0, 8)(rng);
    for (int i = 0; i < n; ++i) {
      entries.push_back({std::string(1, static_cast<char>('a' + rng() % 6)),
                         static_cast<double>(rng() % 4)});
    }
    const auto ti = TokenImportanceExplanation::FromWeights(entries);
    for (size_t i = 1; i < ti.size(); ++i) {
      EXPECT_GE(ti.entries()[i - 1].weight, ti.entries()[i].weight);
      EXPECT_NE(ti.entries()[i - 1].token, ti.entries()[i].token);
    }
  }
}

TEST(Provenance, Strings) {
  EXPECT_EQ(Provenance::Original().ToString(), "original");
  EXPECT_EQ(Provenance::Paraphrase(3).ToString(), "paraphrase:3");
  EXPECT_EQ(Provenance::TemperatureSample(2).ToString(), "sample:2");
}

}  // namespace
}  // namespace nleu
