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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <tuple>

#include "json.hpp"
#include "nleu/errors.h"

namespace nleu {
namespace {

using nlohmann::json;

// Continued fraction for the incomplete beta function (modified Lentz).
double BetaContinuedFraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEpsilon = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEpsilon) break;
  }
  return h;
}

json SummaryJson(const SampleSummary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"stddev", s.stddev}};
}

std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

double RegularizedIncompleteBeta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "incomplete beta needs a, b > 0 and x in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * BetaContinuedFraction(b, a, 1.0 - x) / b;
}

double StudentTTwoSidedPValue(double t, double df) {
  if (!(df > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "degrees of freedom must be > 0");
  }
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(RegularizedIncompleteBeta(df / 2.0, 0.5, x), 0.0, 1.0);
}

SampleSummary Summarize(std::span<const double> values) {
  SampleSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count >= 2) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  return s;
}

WelchResult WelchTTest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::kDegenerateSample,
                "each sample needs at least two values");
  }
  const SampleSummary sa = Summarize(a);
  const SampleSummary sb = Summarize(b);
  const double va = sa.stddev * sa.stddev / static_cast<double>(sa.count);
  const double vb = sb.stddev * sb.stddev / static_cast<double>(sb.count);
  if (!(va > 0.0) || !(vb > 0.0)) {
    throw Error(ErrorCode::kDegenerateSample, "a sample has zero variance");
  }
  WelchResult r;
  r.t_statistic = (sa.mean - sb.mean) / std::sqrt(va + vb);
  r.degrees_of_freedom =
      (va + vb) * (va + vb) /
      (va * va / static_cast<double>(sa.count - 1) +
       vb * vb / static_cast<double>(sb.count - 1));
  r.p_value = StudentTTwoSidedPValue(r.t_statistic, r.degrees_of_freedom);
  return r;
}

std::optional<double> PearsonCorrelation(std::span<const double> x,
                                         std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "correlation inputs differ in length");
  }
  const size_t n = x.size();
  if (n < 2) return std::nullopt;
  double mx = 0.0;
  double my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string_view StrategyName(Strategy strategy) {
  switch (strategy) {
    case Strategy::kVerbalized:
      return "verbalized";
    case Strategy::kSampleProbing:
      return "sample_probe";
    case Strategy::kModelProbing:
      return "model_probe";
  }
  return "unknown";
}

std::optional<Strategy> ParseStrategy(std::string_view name) {
  if (name == "verbalized") return Strategy::kVerbalized;
  if (name == "sample_probe") return Strategy::kSampleProbing;
  if (name == "model_probe") return Strategy::kModelProbing;
  return std::nullopt;
}

CorrectnessSplit SplitByCorrectness(std::span<const QuestionResult> results) {
  CorrectnessSplit split;
  for (const auto& r : results) {
    if (!r.correct.has_value()) {
      ++split.excluded;
    } else if (*r.correct) {
      split.correct.push_back(r.probing_confidence.value());
    } else {
      split.incorrect.push_back(r.probing_confidence.value());
    }
  }
  return split;
}

RunReport SummarizeRun(std::span<const QuestionResult> results) {
  if (results.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no results to summarize");
  }
  using Key = std::tuple<DatasetKind, ExplanationMode, Strategy>;
  std::map<Key, std::vector<const QuestionResult*>> groups;
  for (const auto& r : results) {
    groups[{r.dataset_kind, r.mode, r.strategy}].push_back(&r);
  }

  RunReport report;
  report.total_results = results.size();
  std::vector<double> all_verbalized;
  for (const auto& r : results) {
    report.diagnostics += r.diagnostics.size();
    if (r.verbalized_confidence) {
      all_verbalized.push_back(r.verbalized_confidence->value());
    }
  }
  report.verbalized_confidence = Summarize(all_verbalized);

  for (auto& [key, members] : groups) {
    // Fixed member order makes paired statistics order-independent.
    std::sort(members.begin(), members.end(),
              [](const QuestionResult* a, const QuestionResult* b) {
                return std::tuple(a->question_id, a->probing_confidence.value(),
                                  a->faithfulness.value_or(-1.0)) <
                       std::tuple(b->question_id, b->probing_confidence.value(),
                                  b->faithfulness.value_or(-1.0));
              });
    GroupReport g;
    std::tie(g.dataset_kind, g.mode, g.strategy) = key;
    g.count = members.size();
    std::vector<double> confidence;
    std::vector<double> verbalized;
    std::vector<double> faithfulness;
    std::vector<double> paired_confidence;
    std::vector<QuestionResult> copies;
    for (const auto* r : members) {
      confidence.push_back(r->probing_confidence.value());
      if (r->verbalized_confidence) {
        verbalized.push_back(r->verbalized_confidence->value());
      }
      if (r->faithfulness) {
        faithfulness.push_back(*r->faithfulness);
        paired_confidence.push_back(r->probing_confidence.value());
      }
      copies.push_back(*r);
    }
    g.confidence = Summarize(confidence);
    g.verbalized_confidence = Summarize(verbalized);
    g.faithfulness = Summarize(faithfulness);
    g.confidence_faithfulness_pearson =
        PearsonCorrelation(paired_confidence, faithfulness);

    const CorrectnessSplit split = SplitByCorrectness(copies);
    g.n_correct = split.correct.size();
    g.n_incorrect = split.incorrect.size();
    if (g.n_correct + g.n_incorrect > 0) {
      g.accuracy = static_cast<double>(g.n_correct) /
                   static_cast<double>(g.n_correct + g.n_incorrect);
    }
    g.correct_confidence = Summarize(split.correct);
    g.incorrect_confidence = Summarize(split.incorrect);
    try {
      g.correctness_ttest = WelchTTest(split.correct, split.incorrect);
    } catch (const Error& e) {
      g.ttest_note = e.what();
    }
    report.groups.push_back(std::move(g));
  }
  return report;
}

std::string ReportToJson(const RunReport& report) {
  json groups = json::array();
  for (const auto& g : report.groups) {
    json row = {
        {"dataset_kind", DatasetKindName(g.dataset_kind)},
        {"mode", ExplanationModeName(g.mode)},
        {"strategy", StrategyName(g.strategy)},
        {"count", g.count},
        {"confidence", SummaryJson(g.confidence)},
        {"verbalized_confidence", SummaryJson(g.verbalized_confidence)},
        {"faithfulness", SummaryJson(g.faithfulness)},
        {"accuracy", g.accuracy ? json(*g.accuracy) : json(nullptr)},
        {"n_correct", g.n_correct},
        {"n_incorrect", g.n_incorrect},
        {"correct_confidence", SummaryJson(g.correct_confidence)},
        {"incorrect_confidence", SummaryJson(g.incorrect_confidence)},
        {"confidence_faithfulness_pearson",
         g.confidence_faithfulness_pearson
             ? json(*g.confidence_faithfulness_pearson)
             : json(nullptr)},
    };
    if (g.correctness_ttest) {
      row["correctness_ttest"] = {
          {"t_statistic", g.correctness_ttest->t_statistic},
          {"p_value", g.correctness_ttest->p_value},
          {"degrees_of_freedom", g.correctness_ttest->degrees_of_freedom}};
    } else {
      row["correctness_ttest"] = nullptr;
      row["correctness_ttest_note"] = g.ttest_note;
    }
    groups.push_back(std::move(row));
  }
  const json out = {
      {"total_results", report.total_results},
      {"diagnostics", report.diagnostics},
      {"verbalized_confidence", SummaryJson(report.verbalized_confidence)},
      {"groups", std::move(groups)},
  };
  return out.dump(2) + "\n";
}

std::string ResultsToCsv(std::span<const QuestionResult> results) {
  std::string csv =
      "question_id,dataset_kind,mode,strategy,confidence,verbalized_confidence,"
      "faithfulness,correct,n_effective,n_diagnostics\n";
  for (const auto& r : results) {
    std::string id = r.question_id;
    if (id.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : id) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      id = quoted + "\"";
    }
    csv += id + "," + std::string(DatasetKindName(r.dataset_kind)) + "," +
           std::string(ExplanationModeName(r.mode)) + "," +
           std::string(StrategyName(r.strategy)) + "," +
           FormatNumber(r.probing_confidence.value()) + "," +
           (r.verbalized_confidence
                ? FormatNumber(r.verbalized_confidence->value())
                : "") +
           "," + (r.faithfulness ? FormatNumber(*r.faithfulness) : "") + "," +
           (r.correct ? (*r.correct ? "1" : "0") : "") + "," +
           std::to_string(r.n_effective) + "," +
           std::to_string(r.diagnostics.size()) + "\n";
  }
  return csv;
}

}  // namespace nleu
