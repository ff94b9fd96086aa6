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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any fails. Runs offline against scripted backends.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "nleu/agreement.h"
#include "nleu/analysis.h"
#include "nleu/config.h"
#include "nleu/faithfulness.h"
#include "nleu/gateway.h"
#include "nleu/parser.h"
#include "nleu/perturbation.h"
#include "nleu/pipeline.h"
#include "nleu/serialization.h"
#include "oracles.h"
#include "test_support.h"

namespace nleu {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using oracle::Rational;
using testing::Fixture;
using testing::FunctionBackend;
using testing::QuestionOf;
using testing::ReadText;
using testing::TempDir;
using testing::WriteText;

// Thrown by Require; the message becomes the FAIL reason.
struct Violation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void Require(bool ok, const std::string& what) {
  if (!ok) throw Violation(what);
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

TokenImportanceExplanation Ranked(const std::vector<std::string>& tokens) {
  return TokenImportanceExplanation::FromRanking(tokens);
}

CoTExplanation Chain(const std::vector<std::string>& steps) {
  CoTExplanation cot;
  for (const auto& s : steps) cot.steps.push_back({s, std::nullopt});
  return cot;
}

class Generator {
 public:
  explicit Generator(uint64_t seed) : rng_(seed) {}

  std::vector<std::string> Tokens() {
    static const std::vector<std::string> kVocab = {
        "alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"};
    std::vector<std::string> pool = kVocab;
    std::shuffle(pool.begin(), pool.end(), rng_);
    pool.resize(Uniform(0, 5));
    return pool;
  }
  std::vector<std::string> Steps() {
    static const std::vector<std::string> kSteps = {
        "jake has 17 peaches", "steven has 28 peaches", "add 11 to 17",
        "the answer is 28", "subtract 11"};
    std::vector<std::string> steps(Uniform(1, 5));
    for (auto& s : steps) s = kSteps[Uniform(0, kSteps.size() - 1)];
    return steps;
  }
  int Uniform(size_t lo, size_t hi) {
    return static_cast<int>(std::uniform_int_distribution<size_t>(lo, hi)(rng_));
  }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

void OracleEquivalence() {
  const auto start = Clock::now();
  Generator gen(2024);
  ExactMatchEntailer exact;
  const oracle::Entails same = [](const std::string& a, const std::string& b) {
    return a == b;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = gen.Uniform(1, 5);
    const auto a = gen.Tokens();
    const auto b = gen.Tokens();
    Require(TokenRankAgreement(Ranked(a), Ranked(b), k) ==
                oracle::TokenRank(a, b, k).ToDouble(),
            "token rank agreement differs from oracle");
    Require(Rational::Of(TokenRankMatches(Ranked(a), Ranked(b), k), k) ==
                oracle::TokenRank(a, b, k),
            "token rank matches differ from oracle");
    Require(TokenSetAgreement(Ranked(a), Ranked(b), k) ==
                oracle::TokenSet(a, b, k).ToDouble(),
            "token set agreement differs from oracle");

    const int n = gen.Uniform(1, 5);
    std::vector<TokenImportanceExplanation> ti;
    std::vector<Rational> ti_scores;
    const auto original = gen.Tokens();
    std::vector<CoTExplanation> cot;
    std::vector<Rational> cot_scores;
    const auto original_steps = gen.Steps();
    for (int i = 0; i < n; ++i) {
      const auto p = gen.Tokens();
      ti.push_back(Ranked(p));
      ti_scores.push_back(oracle::TokenRank(p, original, k));
      const auto s = gen.Steps();
      cot.push_back(Chain(s));
      cot_scores.push_back(oracle::CoTAgreement(s, original_steps, same));
      Require(CoTAgreement(Chain(s), Chain(original_steps), exact) ==
                  cot_scores.back().ToDouble(),
              "CoT agreement differs from oracle");
    }
    Require(TokenImportanceUncertainty(Ranked(original), ti, k).value() ==
                oracle::Mean(ti_scores).ToDouble(),
            "token importance uncertainty differs from oracle");
    Require(std::fabs(CoTUncertainty(Chain(original_steps), cot, exact).value() -
                      oracle::Mean(cot_scores).ToDouble()) <= 1e-12,
            "CoT uncertainty differs from oracle by more than 1e-12");
  }
  const double elapsed = Seconds(start);
  Require(elapsed < 10.0, "took " + std::to_string(elapsed) + " s");
}

using Pairs = std::set<std::pair<std::string, std::string>>;

// Entails only for listed ordered pairs.
class TableEntailer : public Entailer {
 public:
  explicit TableEntailer(Pairs yes)
      : yes_(std::move(yes)) {}
  bool Entails(std::string_view a, std::string_view b) override {
    return yes_.count({std::string(a), std::string(b)}) > 0;
  }

 private:
  Pairs yes_;
};

void Anchors() {
  Require(TokenRankMatches(Ranked({"peaches", "steven", "jake"}),
                           Ranked({"peaches", "jake", "steven"}), 3) == 1,
          "token rank matches on the swapped tail");
  Require(TokenRankAgreement(Ranked({"peaches", "steven", "jake"}),
                             Ranked({"peaches", "jake", "steven"}), 3) ==
              1.0 / 3.0,
          "token rank agreement on the swapped tail");
  TableEntailer single(Pairs{{"a1", "b1"}});
  Require(CoTAgreement(Chain({"a1", "a2"}), Chain({"b1", "b2", "b3"}), single) ==
              0.4,
          "CoT agreement with one entailing pair");
  const auto original = Ranked({"peaches", "steven", "jake"});
  Require(TokenImportanceUncertainty(
              original, {original, Ranked({"peaches", "jake", "steven"})}, 3)
                  .value() == 2.0 / 3.0,
          "mean of 1 and 1/3");
}

void FixtureParsing() {
  const auto ti = ParseTokenImportance(ReadText(Fixture("peaches_ti_answer.txt")),
                                       DatasetKind::kMathWord);
  Require(AnswerToString(ti.answer) == "28", "token importance answer");
  Require(ti.confidence && ti.confidence->value() == 1.0,
          "token importance confidence");
  Require(ti.explanation.size() == 3, "token importance entries");
  Require(ti.explanation.TopTokens(1) == std::vector<std::string>{"peaches"},
          "most important token");

  const auto cot =
      ParseCoT(ReadText(Fixture("peaches_cot_answer.txt")), DatasetKind::kMathWord);
  Require(AnswerToString(cot.answer) == "28", "CoT answer");
  Require(cot.confidence && cot.confidence->value() == 1.0, "CoT confidence");
  Require(cot.explanation.steps.size() == 3, "CoT step count");
  for (const auto& step : cot.explanation.steps) {
    Require(step.confidence && step.confidence->value() == 1.0,
            "CoT step confidence");
  }
}

void Properties() {
  Generator gen(77);
  ExactMatchEntailer exact;
  OverlapEntailer overlap(0.5);
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = gen.Uniform(1, 5);
    const auto a = Ranked(gen.Tokens());
    const auto b = Ranked(gen.Tokens());
    const double tr = TokenRankAgreement(a, b, k);
    const double ts = TokenSetAgreement(a, b, k);
    Require(in_unit(tr) && in_unit(ts), "token agreement out of [0, 1]");
    Require(tr == TokenRankAgreement(b, a, k), "token rank not symmetric");
    Require(ts >= tr, "set agreement below rank agreement");

    const auto ca = Chain(gen.Steps());
    const auto cb = Chain(gen.Steps());
    for (Entailer* e : {static_cast<Entailer*>(&exact),
                        static_cast<Entailer*>(&overlap)}) {
      const double c = CoTAgreement(ca, cb, *e);
      Require(in_unit(c), "CoT agreement out of [0, 1]");
      Require(c == CoTAgreement(cb, ca, *e), "CoT agreement not symmetric");
    }

    const int n = gen.Uniform(1, 5);
    std::vector<TokenImportanceExplanation> ti;
    std::vector<CoTExplanation> cot;
    for (int i = 0; i < n; ++i) {
      ti.push_back(Ranked(gen.Tokens()));
      cot.push_back(Chain(gen.Steps()));
    }
    const double u_ti = TokenImportanceUncertainty(a, ti, k).value();
    const double u_cot = CoTUncertainty(ca, cot, overlap).value();
    Require(in_unit(u_ti) && in_unit(u_cot), "uncertainty out of [0, 1]");
    std::shuffle(ti.begin(), ti.end(), gen.rng());
    std::shuffle(cot.begin(), cot.end(), gen.rng());
    Require(TokenImportanceUncertainty(a, ti, k).value() == u_ti,
            "token importance uncertainty depends on order");
    Require(CoTUncertainty(ca, cot, overlap).value() == u_cot,
            "CoT uncertainty depends on order");
  }
}

std::map<std::string, std::string> Snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      files[fs::relative(entry.path(), dir).string()] = ReadText(entry.path());
    }
  }
  return files;
}

void Determinism() {
  TempDir out;
  RunConfig config = LoadConfig(Fixture("pipeline/config.json"));
  config.output_dir = out.path();
  const RunOutcome first = RunPipeline(config);
  Require(first.status == RunStatus::kOk && first.failed_rows == 0,
          "first run had failures");
  const auto before = Snapshot(first.run_dir);
  const RunOutcome second = RunPipeline(config);
  Require(second.stats.backend_calls == 0,
          "second run made " + std::to_string(second.stats.backend_calls) +
              " backend calls");
  Require(second.run_dir == first.run_dir, "run directory moved");
  Require(Snapshot(second.run_dir) == before, "run directories differ");
}

std::string RankFromQuestion(const std::string& question,
                             const std::vector<std::vector<std::string>>& slots) {
  std::string out;
  const auto words = NormalizedWords(question);
  for (size_t rank = 0; rank < slots.size(); ++rank) {
    for (const auto& w : slots[rank]) {
      if (std::find(words.begin(), words.end(), w) != words.end()) {
        out += "Word: " + w + ", Importance: " +
               std::to_string(60 - 20 * static_cast<int>(rank)) + "%\n";
        break;
      }
    }
  }
  return out + "Final answer and overall confidence (0-100): 28, 100%";
}

void FaithfulnessOracles() {
  const Question q{"peaches",
                   "Jake has 11 fewer peaches than Steven. If Jake has 17 "
                   "peaches. How many peaches does Steven have?",
                   DatasetKind::kMathWord, std::nullopt};
  ElicitationOptions options;
  options.model_name = "mock";

  // Follows whichever name the question uses.
  auto reflector = std::make_shared<FunctionBackend>([](const CompletionRequest& r) {
    return RankFromQuestion(QuestionOf(r.prompt), {{"peaches", "nectarines"},
                                                   {"jake", "jacob"},
                                                   {"steven", "stephen"}});
  });
  ModelGateway reflect_gw(reflector, std::make_shared<ResponseCache>());
  WordlistSynonyms synonyms(
      {{"peaches", "nectarines"}, {"jake", "jacob"}, {"steven", "stephen"}});
  const TokenImportanceExplanation ti(
      {{"peaches", 0.6}, {"jake", 0.2}, {"steven", 0.2}});
  const auto cf =
      TokenImportanceCounterfactual(reflect_gw, q, ti, 3, synonyms, options);
  Require(cf.score == 1.0, "perfect reflector scored " + std::to_string(cf.score));

  // Reaches the answer only from the complete chain.
  auto full_only = std::make_shared<FunctionBackend>([](const CompletionRequest& r) {
    const bool complete = r.prompt.find("Step 3:") != std::string::npos;
    return std::string("Final answer and overall confidence (0-100): ") +
           (complete ? "28" : "17") + ", 90%";
  });
  ModelGateway full_gw(full_only, std::make_shared<ResponseCache>());
  const auto cot = ParseCoT(ReadText(Fixture("peaches_cot_answer.txt")),
                            DatasetKind::kMathWord);
  const auto early =
      CoTEarlyAnswering(full_gw, q, cot.explanation, cot.answer, options);
  Require(early.matching_fraction == 1.0 / 3.0,
          "full-context-only mock scored " +
              std::to_string(early.matching_fraction));
}

void Statistics() {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 100; ++trial) {
    std::normal_distribution<double> da(std::uniform_real_distribution<>(0, 1)(rng),
                                        std::uniform_real_distribution<>(0.05, 0.5)(rng));
    std::normal_distribution<double> db(std::uniform_real_distribution<>(0, 1)(rng),
                                        std::uniform_real_distribution<>(0.05, 0.5)(rng));
    std::vector<double> a(std::uniform_int_distribution<int>(2, 60)(rng));
    std::vector<double> b(std::uniform_int_distribution<int>(2, 60)(rng));
    for (auto& x : a) x = da(rng);
    for (auto& x : b) x = db(rng);
    const auto got = WelchTTest(a, b);
    const auto want = oracle::Welch(a, b);
    Require(std::fabs(got.t_statistic - want.t_statistic) <= 1e-6,
            "t statistic differs from reference");
    Require(std::fabs(got.p_value - want.p_value) <= 1e-6,
            "p value differs from reference");
  }
  const auto j = nlohmann::json::parse(ReadText(Fixture("welch_engineered.json")));
  const auto r = WelchTTest(j["correct"].get<std::vector<double>>(),
                            j["incorrect"].get<std::vector<double>>());
  Require(std::fabs(r.t_statistic - 3.7558) <= 1e-3,
          "engineered fixture gave t = " + std::to_string(r.t_statistic));
}

// Builds a seeded stochastic scripted backend: questions tagged [cNN] get one
// consistent explanation with the right answer, questions tagged [iNN] draw
// from divergent explanations with a wrong answer. Every stated confidence
// is 100%.
void WriteStochasticFixture(const fs::path& dir, int per_class) {
  std::ostringstream dataset;
  std::ostringstream mock;
  auto rule = [&](const std::string& regex, const std::vector<std::string>& responses,
                  bool seeded) {
    nlohmann::json r = {{"match", {{"regex", regex}}}, {"responses", responses}};
    if (seeded) r["pick"] = "seeded";
    mock << r.dump() << "\n";
  };
  for (const char* cls : {"c", "i"}) {
    for (int i = 0; i < per_class; ++i) {
      char tag[8];
      std::snprintf(tag, sizeof tag, "%s%02d", cls, i);
      const std::string t = tag;
      dataset << nlohmann::json{{"id", t},
                                {"question",
                                 "A crate holds 4 rows of 5 apples minus 10 "
                                 "bruised ones. How many good apples remain [" +
                                     t + "]?"},
                                {"answer", "10"},
                                {"dataset_kind", "mathword"}}
                     .dump()
              << "\n";
      std::vector<std::string> variants;
      for (int v = 1; v <= 4; ++v) {
        variants.push_back("Variant " + std::to_string(v) +
                           ": how many good apples are left [" + t + "]?");
      }
      rule("^Paraphrase the question[\\s\\S]*\\[" + t + "\\]",
           {nlohmann::json(variants).dump()}, false);
    }
  }
  const std::string final_ok = "Final answer and overall confidence (0-100): 10, 100%";
  const std::string final_bad = "Final answer and overall confidence (0-100): 13, 100%";
  const std::string ti_prompt =
      "(assign each word an importance score|output the words important)";
  rule(ti_prompt + "[\\s\\S]*\\[c\\d+\\]",
       {"Word: apples, Importance: 50%\nWord: rows, Importance: 30%\n"
        "Word: bruised, Importance: 20%\n" + final_ok},
       false);
  std::vector<std::string> ti_divergent;
  const std::vector<std::vector<std::string>> orders = {
      {"crate", "holds", "minus"}, {"good", "remain", "apples"},
      {"bruised", "crate", "rows"}, {"minus", "good", "holds"},
      {"remain", "rows", "crate"}, {"holds", "apples", "good"}};
  for (const auto& o : orders) {
    ti_divergent.push_back("1. " + o[0] + "\n2. " + o[1] + "\n3. " + o[2] + "\n" +
                           final_bad);
  }
  rule(ti_prompt + "[\\s\\S]*\\[i\\d+\\]", ti_divergent, true);

  rule("analyzing step by step[\\s\\S]*\\[c\\d+\\]",
       {"Step 1: There are 4 rows of 5 apples so 20 apples, Confidence: 100%\n"
        "Step 2: Removing 10 bruised apples leaves 10, Confidence: 100%\n" +
        final_ok},
       false);
  rule("analyzing step by step[\\s\\S]*\\[i\\d+\\]",
       {"Step 1: Count the crate as nine, Confidence: 100%\n"
        "Step 2: Add four more for thirteen, Confidence: 100%\n" + final_bad,
        "Step 1: Multiply rows by bruised fruit, Confidence: 100%\n"
        "Step 2: Subtract twenty seven, Confidence: 100%\n" + final_bad,
        "Step 1: Guess a plausible total quickly, Confidence: 100%\n" + final_bad,
        "Step 1: Each row loses two apples, Confidence: 100%\n"
        "Step 2: Three rows stay intact somehow, Confidence: 100%\n"
        "Step 3: That gives thirteen overall, Confidence: 100%\n" + final_bad,
        "Step 1: Half the apples vanish, Confidence: 100%\n" + final_bad},
       true);
  rule("partial reasoning below", {final_ok}, false);

  WriteText(dir / "dataset.jsonl", dataset.str());
  WriteText(dir / "mock.jsonl", mock.str());
}

void QualitativePattern() {
  const auto start = Clock::now();
  TempDir dir;
  WriteStochasticFixture(dir.path(), 10);
  nlohmann::ordered_json doc = {
      {"backend", {{"kind", "mock"}, {"fixture", "mock.jsonl"}, {"seed", 11}}},
      {"dataset", {{"path", "dataset.jsonl"}}},
      {"n_paraphrases", 4},
      {"n_samples", 4},
      {"subset", 20},
      {"entailment", "overlap:0.6"},
      {"faithfulness", false},
      {"output_dir", "runs"}};
  const RunConfig config = ConfigFromJson(doc, dir.path());
  const RunOutcome outcome = RunPipeline(config);
  Require(outcome.status == RunStatus::kOk && outcome.failed_rows == 0,
          "stochastic run had failures");

  std::vector<QuestionResult> probing;
  std::vector<double> verbalized;
  std::istringstream lines(ReadText(outcome.run_dir / "results.jsonl"));
  for (std::string line; std::getline(lines, line);) {
    if (line.empty()) continue;
    QuestionResult r = ResultFromJson(nlohmann::ordered_json::parse(line));
    if (r.verbalized_confidence) verbalized.push_back(r.verbalized_confidence->value());
    if (r.strategy != Strategy::kVerbalized) probing.push_back(std::move(r));
  }
  const auto split = SplitByCorrectness(probing);
  Require(!split.correct.empty() && !split.incorrect.empty(),
          "need both correct and incorrect answers");
  const double correct_mean = Summarize(split.correct).mean;
  const double incorrect_mean = Summarize(split.incorrect).mean;
  Require(correct_mean > incorrect_mean,
          "probing confidence correct " + std::to_string(correct_mean) +
              " <= incorrect " + std::to_string(incorrect_mean));
  Require(Summarize(verbalized).mean == 1.0, "mean verbalized confidence != 1");
  const RunReport report = ReportRun(outcome.run_dir);
  Require(report.verbalized_confidence.mean == 1.0,
          "report verbalized confidence != 1");
  const double elapsed = Seconds(start);
  Require(elapsed < 60.0, "took " + std::to_string(elapsed) + " s");
}

}  // namespace
}  // namespace nleu

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"metrics match brute-force oracles", nleu::OracleEquivalence},
      {"hand-derived anchors", nleu::Anchors},
      {"example answer blocks parse", nleu::FixtureParsing},
      {"bounds, symmetry and order invariance", nleu::Properties},
      {"end-to-end determinism and cache replay", nleu::Determinism},
      {"faithfulness oracles", nleu::FaithfulnessOracles},
      {"Welch t-test against reference", nleu::Statistics},
      {"confidence separates correct from incorrect", nleu::QualitativePattern},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    std::string reason;
    try {
      criteria[i].second();
    } catch (const std::exception& e) {
      reason = e.what();
    }
    std::printf("%s %zu %s%s%s\n", reason.empty() ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), reason.empty() ? "" : ": ",
                reason.c_str());
    failures += !reason.empty();
  }
  return failures == 0 ? 0 : 1;
}
