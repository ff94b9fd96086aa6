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

#include "nleu/analysis.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"
#include "nleu/errors.h"
#include "oracles.h"
#include "test_support.h"

namespace nleu {
namespace {

// Welch test written directly from the textbook formulas, with the p-value
// taken from Boost's Student t distribution.
QuestionResult Result(std::string id, Strategy strategy, double confidence,
                      std::optional<bool> correct,
                      std::optional<double> faithfulness = std::nullopt,
                      std::optional<double> verbalized = 1.0) {
  QuestionResult r;
  r.question_id = std::move(id);
  r.strategy = strategy;
  r.probing_confidence = ConfidenceScore(confidence);
  if (verbalized) r.verbalized_confidence = ConfidenceScore(*verbalized);
  r.faithfulness = faithfulness;
  r.correct = correct;
  return r;
}

TEST(WelchTTest, IdenticalSamples) {
  const std::vector<double> a = {1, 2, 3};
  const auto r = WelchTTest(a, a);
  EXPECT_EQ(r.t_statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(WelchTTest, HandComputedStatistic) {
  const std::vector<double> a = {2, 4, 6};
  const std::vector<double> b = {1, 2, 3};
  // Means 4 and 2, variances 4 and 1: se = sqrt(4/3 + 1/3).
  EXPECT_NEAR(WelchTTest(a, b).t_statistic, 2.0 / std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_NEAR(WelchTTest(a, b).t_statistic, 1.549, 1e-3);
}

TEST(WelchTTest, DegenerateSamples) {
  const std::vector<double> one = {1.0};
  const std::vector<double> flat = {2.0, 2.0, 2.0};
  const std::vector<double> ok = {1.0, 2.0};
  for (const auto& [a, b] : {std::pair(one, ok), std::pair(ok, flat)}) {
    try {
      WelchTTest(a, b);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDegenerateSample);
    }
  }
}

TEST(WelchTTest, AntisymmetricInT) {
  const std::vector<double> a = {0.9, 0.8, 1.0, 0.7};
  const std::vector<double> b = {0.5, 0.6, 0.4};
  const auto ab = WelchTTest(a, b);
  const auto ba = WelchTTest(b, a);
  EXPECT_EQ(ab.t_statistic, -ba.t_statistic);
  EXPECT_EQ(ab.p_value, ba.p_value);
}

TEST(WelchTTest, MatchesReferenceOnRandomSamples) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int na = std::uniform_int_distribution<int>(2, 60)(rng);
    const int nb = std::uniform_int_distribution<int>(2, 60)(rng);
    std::normal_distribution<double> da(
        std::uniform_real_distribution<double>(-1, 1)(rng),
        std::uniform_real_distribution<double>(0.1, 3)(rng));
    std::normal_distribution<double> db(
        std::uniform_real_distribution<double>(-1, 1)(rng),
        std::uniform_real_distribution<double>(0.1, 3)(rng));
    std::vector<double> a(na), b(nb);
    for (auto& x : a) x = da(rng);
    for (auto& x : b) x = db(rng);
    const auto got = WelchTTest(a, b);
    const auto want = oracle::Welch(a, b);
    EXPECT_NEAR(got.t_statistic, want.t_statistic, 1e-6);
    EXPECT_NEAR(got.p_value, want.p_value, 1e-6);
    EXPECT_NEAR(got.degrees_of_freedom, want.degrees_of_freedom, 1e-6);
  }
}

TEST(WelchTTest, EngineeredFixture) {
  const auto j = nlohmann::json::parse(
      testing::ReadText(testing::Fixture("welch_engineered.json")));
  const auto a = j["correct"].get<std::vector<double>>();
  const auto b = j["incorrect"].get<std::vector<double>>();
  const auto r = WelchTTest(a, b);
  EXPECT_NEAR(r.t_statistic, 3.7558, 1e-3);
  EXPECT_NEAR(r.p_value, 0.0003, 5e-5);
}

TEST(StudentT, KnownQuantiles) {
  // Two-sided 5% critical values.
  EXPECT_NEAR(StudentTTwoSidedPValue(12.706204736, 1), 0.05, 1e-8);
  EXPECT_NEAR(StudentTTwoSidedPValue(2.228138852, 10), 0.05, 1e-8);
  EXPECT_EQ(StudentTTwoSidedPValue(0.0, 5), 1.0);
  EXPECT_THROW(StudentTTwoSidedPValue(1.0, 0.0), Error);
  EXPECT_NEAR(RegularizedIncompleteBeta(2, 3, 0.4), 0.5248, 1e-12);
}

TEST(Summarize, SampleStandardDeviation) {
  const std::vector<double> v = {2, 4, 4, 4, 5, 5, 7, 9};
  const auto s = Summarize(v);
  EXPECT_EQ(s.count, 8u);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_DOUBLE_EQ(s.stddev, std::sqrt(32.0 / 7.0));
  const std::vector<double> single = {0.4};
  EXPECT_EQ(Summarize(single).stddev, 0.0);
  EXPECT_EQ(Summarize(std::vector<double>{}).count, 0u);
}

TEST(Pearson, LinearAndDegenerate) {
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {3, 5, 7, 9};
  const std::vector<double> neg = {4, 3, 2, 1};
  const std::vector<double> flat = {1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(*PearsonCorrelation(x, y), 1.0);
  EXPECT_DOUBLE_EQ(*PearsonCorrelation(x, neg), -1.0);
  EXPECT_FALSE(PearsonCorrelation(x, flat).has_value());
  EXPECT_FALSE(
      PearsonCorrelation(std::vector<double>{1}, std::vector<double>{2}));
}

TEST(CorrectnessSplit, PartitionsAndCountsExcluded) {
  std::vector<QuestionResult> results = {
      Result("a", Strategy::kSampleProbing, 0.9, true),
      Result("b", Strategy::kSampleProbing, 0.8, true),
      Result("c", Strategy::kSampleProbing, 0.7, true),
      Result("d", Strategy::kSampleProbing, 0.2, false),
      Result("e", Strategy::kSampleProbing, 0.3, false),
      Result("f", Strategy::kSampleProbing, 0.5, std::nullopt),
  };
  const auto split = SplitByCorrectness(results);
  EXPECT_EQ(split.correct, (std::vector<double>{0.9, 0.8, 0.7}));
  EXPECT_EQ(split.incorrect, (std::vector<double>{0.2, 0.3}));
  EXPECT_EQ(split.excluded, 1u);

  results.resize(3);
  EXPECT_TRUE(SplitByCorrectness(results).incorrect.empty());
}

TEST(CorrectnessSplit, MatchesFilterOnRandomFixture) {
  std::mt19937 rng(5);
  std::vector<QuestionResult> results;
  for (int i = 0; i < 200; ++i) {
    const int flag = std::uniform_int_distribution<int>(0, 2)(rng);
    results.push_back(Result(
        std::to_string(i), Strategy::kModelProbing,
        std::uniform_real_distribution<double>(0, 1)(rng),
        flag == 2 ? std::nullopt : std::optional<bool>(flag == 1)));
  }
  const auto split = SplitByCorrectness(results);
  std::vector<double> correct, incorrect;
  size_t excluded = 0;
  for (const auto& r : results) {
    if (!r.correct) {
      ++excluded;
    } else {
      (*r.correct ? correct : incorrect).push_back(r.probing_confidence.value());
    }
  }
  EXPECT_EQ(split.correct, correct);
  EXPECT_EQ(split.incorrect, incorrect);
  EXPECT_EQ(split.excluded, excluded);
}

TEST(SummarizeRun, SingleResult) {
  const std::vector<QuestionResult> results = {
      Result("a", Strategy::kVerbalized, 0.8, true, 0.5, 0.9)};
  const auto report = SummarizeRun(results);
  ASSERT_EQ(report.groups.size(), 1u);
  const auto& g = report.groups[0];
  EXPECT_EQ(g.confidence.mean, 0.8);
  EXPECT_EQ(g.confidence.stddev, 0.0);
  EXPECT_EQ(g.verbalized_confidence.mean, 0.9);
  EXPECT_EQ(g.faithfulness.mean, 0.5);
  EXPECT_EQ(*g.accuracy, 1.0);
  EXPECT_FALSE(g.correctness_ttest.has_value());
  EXPECT_FALSE(g.ttest_note.empty());
  EXPECT_THROW(SummarizeRun(std::vector<QuestionResult>{}), Error);
}

TEST(SummarizeRun, MatchesIndependentAggregation) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<QuestionResult> results;
  for (int i = 0; i < 10; ++i) {
    auto r = Result("q" + std::to_string(i),
                    i % 2 ? Strategy::kSampleProbing : Strategy::kModelProbing,
                    u(rng), i % 3 != 0, u(rng), u(rng));
    results.push_back(r);
  }
  const auto report = SummarizeRun(results);
  ASSERT_EQ(report.groups.size(), 2u);
  for (const auto& g : report.groups) {
    std::vector<double> conf, faith, verbal, correct, incorrect;
    for (const auto& r : results) {
      if (r.strategy != g.strategy) continue;
      conf.push_back(r.probing_confidence.value());
      faith.push_back(*r.faithfulness);
      verbal.push_back(r.verbalized_confidence->value());
      (*r.correct ? correct : incorrect).push_back(r.probing_confidence.value());
    }
    auto mean = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x;
      return s / v.size();
    };
    auto sd = [&](const std::vector<double>& v) {
      const double m = mean(v);
      double s = 0;
      for (double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / (v.size() - 1));
    };
    EXPECT_EQ(g.count, conf.size());
    EXPECT_NEAR(g.confidence.mean, mean(conf), 1e-12);
    EXPECT_NEAR(g.confidence.stddev, sd(conf), 1e-12);
    EXPECT_NEAR(g.faithfulness.mean, mean(faith), 1e-12);
    EXPECT_NEAR(g.verbalized_confidence.mean, mean(verbal), 1e-12);
    EXPECT_EQ(g.n_correct, correct.size());
    EXPECT_EQ(g.n_incorrect, incorrect.size());
    EXPECT_NEAR(*g.accuracy,
                static_cast<double>(correct.size()) / conf.size(), 1e-12);
    ASSERT_TRUE(g.correctness_ttest.has_value());
    EXPECT_NEAR(g.correctness_ttest->t_statistic,
                oracle::Welch(correct, incorrect).t_statistic, 1e-9);
    ASSERT_TRUE(g.confidence_faithfulness_pearson.has_value());
    EXPECT_GE(*g.confidence_faithfulness_pearson, -1.0);
    EXPECT_LE(*g.confidence_faithfulness_pearson, 1.0);
  }
}

TEST(SummarizeRun, AllVerbalizedAtOne) {
  std::vector<QuestionResult> results;
  for (int i = 0; i < 5; ++i) {
    results.push_back(Result(std::to_string(i), Strategy::kVerbalized, 1.0,
                             i % 2 == 0, std::nullopt, 1.0));
  }
  EXPECT_EQ(SummarizeRun(results).verbalized_confidence.mean, 1.0);
}

TEST(SummarizeRun, IndependentOfResultOrder) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<QuestionResult> results;
  for (int i = 0; i < 40; ++i) {
    results.push_back(Result("q" + std::to_string(i),
                             static_cast<Strategy>(i % 3), u(rng), u(rng) > 0.4,
                             u(rng), u(rng)));
  }
  const std::string expected = ReportToJson(SummarizeRun(results));
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(results.begin(), results.end(), rng);
    EXPECT_EQ(ReportToJson(SummarizeRun(results)), expected);
  }
}

TEST(Reports, JsonAndCsvShapes) {
  const std::vector<QuestionResult> results = {
      Result("a", Strategy::kSampleProbing, 0.5, true, 0.25),
      Result("b,c", Strategy::kSampleProbing, 1.0, std::nullopt, std::nullopt,
             std::nullopt)};
  const auto json = nlohmann::json::parse(ReportToJson(SummarizeRun(results)));
  EXPECT_EQ(json["total_results"], 2);
  EXPECT_EQ(json["groups"][0]["strategy"], "sample_probe");
  const std::string csv = ResultsToCsv(results);
  EXPECT_EQ(csv,
            "question_id,dataset_kind,mode,strategy,confidence,"
            "verbalized_confidence,faithfulness,correct,n_effective,"
            "n_diagnostics\n"
            "a,mathword,ti,sample_probe,0.5,1,0.25,1,0,0\n"
            "\"b,c\",mathword,ti,sample_probe,1,,,,0,0\n");
}

TEST(Strategy, Names) {
  for (auto s : {Strategy::kVerbalized, Strategy::kSampleProbing,
                 Strategy::kModelProbing}) {
    EXPECT_EQ(ParseStrategy(StrategyName(s)), s);
  }
  EXPECT_FALSE(ParseStrategy("other").has_value());
}

}  // namespace
}  // namespace nleu
