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

#ifndef NLEU_ANALYSIS_H_
#define NLEU_ANALYSIS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nleu/domain.h"
#include "nleu/perturbation.h"

namespace nleu {

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double RegularizedIncompleteBeta(double a, double b, double x);

// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double StudentTTwoSidedPValue(double t, double df);

struct WelchResult {
  double t_statistic = 0.0;
  double p_value = 1.0;  // two-sided
  double degrees_of_freedom = 0.0;
};

// Unequal-variance two-sample t-test with Welch-Satterthwaite degrees of
// freedom. Throws kDegenerateSample when either sample has fewer than two
// values or zero variance.
WelchResult WelchTTest(std::span<const double> a, std::span<const double> b);

struct SampleSummary {
  size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 when count < 2
};

SampleSummary Summarize(std::span<const double> values);

// Pearson correlation; nullopt for fewer than two pairs or a constant side.
std::optional<double> PearsonCorrelation(std::span<const double> x,
                                         std::span<const double> y);

// "verbalized" is the third strategy next to the two probing ones.
enum class Strategy { kVerbalized, kSampleProbing, kModelProbing };

std::string_view StrategyName(Strategy strategy);
std::optional<Strategy> ParseStrategy(std::string_view name);

struct QuestionResult {
  std::string question_id;
  DatasetKind dataset_kind = DatasetKind::kMathWord;
  ExplanationMode mode = ExplanationMode::kTokenImportance;
  Strategy strategy = Strategy::kVerbalized;
  // Explanation confidence under `strategy`: the probing score for the probing
  // strategies, the model's stated confidence for kVerbalized.
  ConfidenceScore probing_confidence{0.0};
  std::optional<ConfidenceScore> verbalized_confidence;
  std::optional<double> faithfulness;
  std::optional<bool> correct;  // only when a gold answer exists
  int n_effective = 0;
  std::vector<Diagnostic> diagnostics;
};

struct CorrectnessSplit {
  std::vector<double> correct;
  std::vector<double> incorrect;
  size_t excluded = 0;  // results without a correctness flag
};

CorrectnessSplit SplitByCorrectness(std::span<const QuestionResult> results);

struct GroupReport {
  DatasetKind dataset_kind;
  ExplanationMode mode;
  Strategy strategy;
  size_t count = 0;
  SampleSummary confidence;
  SampleSummary verbalized_confidence;
  SampleSummary faithfulness;
  std::optional<double> accuracy;
  size_t n_correct = 0;
  size_t n_incorrect = 0;
  SampleSummary correct_confidence;
  SampleSummary incorrect_confidence;
  std::optional<WelchResult> correctness_ttest;
  std::string ttest_note;  // why the t-test is absent, if it is
  std::optional<double> confidence_faithfulness_pearson;
};

struct RunReport {
  std::vector<GroupReport> groups;  // sorted by (dataset, mode, strategy)
  size_t total_results = 0;
  SampleSummary verbalized_confidence;  // over every result that has one
  size_t diagnostics = 0;
};

// Throws kInvalidArgument on an empty input. The report does not depend on
// the order of `results`.
RunReport SummarizeRun(std::span<const QuestionResult> results);

// One aggregate object per group.
std::string ReportToJson(const RunReport& report);

// One row per result with header
// question_id,dataset_kind,mode,strategy,confidence,verbalized_confidence,
// faithfulness,correct,n_effective,n_diagnostics
std::string ResultsToCsv(std::span<const QuestionResult> results);

}  // namespace nleu

#endif  // NLEU_ANALYSIS_H_
