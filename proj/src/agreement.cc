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

#include "nleu/agreement.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>
#include <unordered_set>

#include "nleu/errors.h"
#include "nleu/gateway.h"
#include "nleu/perturbation.h"
#include "nleu/prompting.h"

namespace nleu {
namespace {

void CheckK(int k) {
  if (k < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "k must be >= 1, got " + std::to_string(k));
  }
}

double SortedMean(std::vector<double> scores) {
  std::sort(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += s;
  return std::clamp(sum / static_cast<double>(scores.size()), 0.0, 1.0);
}

}  // namespace

int TokenRankMatches(const TokenImportanceExplanation& a,
                     const TokenImportanceExplanation& b, int k) {
  CheckK(k);
  const auto top_a = a.TopTokens(k);
  const auto top_b = b.TopTokens(k);
  const size_t shared = std::min(top_a.size(), top_b.size());
  int matches = 0;
  for (size_t i = 0; i < shared; ++i) {
    // Tokens are unique within an explanation, so a positional match is a
    // token present in both top-k lists with equal rank.
    if (top_a[i] == top_b[i]) ++matches;
  }
  return matches;
}

double TokenRankAgreement(const TokenImportanceExplanation& a,
                          const TokenImportanceExplanation& b, int k) {
  return static_cast<double>(TokenRankMatches(a, b, k)) /
         static_cast<double>(k);
}

double TokenSetAgreement(const TokenImportanceExplanation& a,
                         const TokenImportanceExplanation& b, int k) {
  CheckK(k);
  const auto top_a = a.TopTokens(k);
  const auto top_b = b.TopTokens(k);
  const std::unordered_set<std::string> in_b(top_b.begin(), top_b.end());
  int common = 0;
  for (const auto& t : top_a) common += in_b.count(t) ? 1 : 0;
  return static_cast<double>(common) / static_cast<double>(k);
}

ConfidenceScore TokenImportanceUncertainty(
    const TokenImportanceExplanation& original,
    const std::vector<TokenImportanceExplanation>& perturbed, int k) {
  CheckK(k);
  if (perturbed.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "uncertainty needs at least one perturbed explanation");
  }
  int64_t matches = 0;
  for (const auto& p : perturbed) matches += TokenRankMatches(p, original, k);
  return ConfidenceScore(static_cast<double>(matches) /
                         (static_cast<double>(k) *
                          static_cast<double>(perturbed.size())));
}

ConfidenceScore TokenImportanceUncertainty(const ProbingSet& set, int k) {
  const auto* original =
      std::get_if<TokenImportanceExplanation>(&set.original.explanation);
  if (original == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "probing set does not hold token importance explanations",
                set.question.id);
  }
  std::vector<TokenImportanceExplanation> perturbed;
  perturbed.reserve(set.perturbed.size());
  for (const auto& r : set.perturbed) {
    const auto* ti = std::get_if<TokenImportanceExplanation>(&r.explanation);
    if (ti == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mixed explanation kinds in probing set", set.question.id);
    }
    perturbed.push_back(*ti);
  }
  return TokenImportanceUncertainty(*original, perturbed, k);
}

EntailmentBackendSpec EntailmentBackendSpec::Parse(std::string_view text) {
  EntailmentBackendSpec spec;
  if (text == "exact") {
    spec.kind = Kind::kExactMatch;
  } else if (text == "llm") {
    spec.kind = Kind::kLlmJudge;
  } else if (text.starts_with("overlap")) {
    spec.kind = Kind::kNormalizedOverlap;
    if (text.size() > 7) {
      if (text[7] != ':') {
        throw Error(ErrorCode::kConfigError, "bad entailment spec",
                    std::string(text));
      }
      const std::string value(text.substr(8));
      char* end = nullptr;
      spec.threshold = std::strtod(value.c_str(), &end);
      if (value.empty() || *end != '\0' || !(spec.threshold >= 0.0) ||
          spec.threshold > 1.0) {
        throw Error(ErrorCode::kConfigError,
                    "overlap threshold must lie in [0, 1]", std::string(text));
      }
    }
  } else {
    throw Error(ErrorCode::kConfigError,
                "entailment backend must be exact, overlap[:t] or llm",
                std::string(text));
  }
  return spec;
}

std::string EntailmentBackendSpec::ToString() const {
  switch (kind) {
    case Kind::kExactMatch:
      return "exact";
    case Kind::kLlmJudge:
      return "llm";
    case Kind::kNormalizedOverlap: {
      std::string t = std::to_string(threshold);
      t.erase(t.find_last_not_of('0') + 1);
      if (!t.empty() && t.back() == '.') t.pop_back();
      return "overlap:" + t;
    }
  }
  return "unknown";
}

bool ExactMatchEntailer::Entails(std::string_view a, std::string_view b) {
  return NormalizeToken(a) == NormalizeToken(b);
}

double WordJaccard(std::string_view a, std::string_view b) {
  const auto wa = NormalizedWords(a);
  const auto wb = NormalizedWords(b);
  const std::set<std::string> sa(wa.begin(), wa.end());
  const std::set<std::string> sb(wb.begin(), wb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  size_t common = 0;
  for (const auto& w : sa) common += sb.count(w);
  const size_t uni = sa.size() + sb.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

OverlapEntailer::OverlapEntailer(double threshold) : threshold_(threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "overlap threshold must lie in [0, 1]");
  }
}

bool OverlapEntailer::Entails(std::string_view a, std::string_view b) {
  // Jaccard is symmetric, so one evaluation covers both directions.
  return WordJaccard(a, b) >= threshold_;
}

NliLabel ParseNliLabel(std::string_view response) {
  for (const auto& w : NormalizedWords(response)) {
    if (w.starts_with("entail")) return NliLabel::kEntailment;
    if (w.starts_with("contradict")) return NliLabel::kContradiction;
    if (w == "neutral") return NliLabel::kNeutral;
  }
  throw Error(ErrorCode::kJudgeUnparseable, "no NLI label in judge output",
              std::string(response.substr(0, 200)));
}

LlmJudgeEntailer::LlmJudgeEntailer(ModelGateway& gateway,
                                   std::string model_name, bool bidirectional,
                                   int max_tokens)
    : gateway_(gateway),
      model_name_(std::move(model_name)),
      bidirectional_(bidirectional),
      max_tokens_(max_tokens) {}

bool LlmJudgeEntailer::Directional(const std::string& premise,
                                   const std::string& hypothesis) {
  {
    std::lock_guard lock(mutex_);
    auto it = memo_.find({premise, hypothesis});
    if (it != memo_.end()) return it->second;
  }
  CompletionRequest request;
  request.prompt = BuildEntailmentPrompt(premise, hypothesis);
  request.params.model_name = model_name_;
  request.params.temperature = 0.0;
  request.params.max_tokens = max_tokens_;
  const bool entails =
      ParseNliLabel(gateway_.Complete(request)) == NliLabel::kEntailment;
  std::lock_guard lock(mutex_);
  memo_[{premise, hypothesis}] = entails;
  return entails;
}

bool LlmJudgeEntailer::Entails(std::string_view a, std::string_view b) {
  const std::string sa(a);
  const std::string sb(b);
  const bool forward = Directional(sa, sb);
  if (!bidirectional_) return forward || Directional(sb, sa);
  return forward && Directional(sb, sa);
}

std::unique_ptr<Entailer> MakeEntailer(const EntailmentBackendSpec& spec,
                                       ModelGateway* gateway) {
  switch (spec.kind) {
    case EntailmentBackendSpec::Kind::kExactMatch:
      return std::make_unique<ExactMatchEntailer>();
    case EntailmentBackendSpec::Kind::kNormalizedOverlap:
      return std::make_unique<OverlapEntailer>(spec.threshold);
    case EntailmentBackendSpec::Kind::kLlmJudge:
      if (gateway == nullptr) {
        throw Error(ErrorCode::kConfigError,
                    "llm entailment needs a configured gateway");
      }
      return std::make_unique<LlmJudgeEntailer>(*gateway, spec.model_name,
                                                spec.bidirectional);
  }
  throw Error(ErrorCode::kConfigError, "unknown entailment backend");
}

double CoTAgreement(const CoTExplanation& a, const CoTExplanation& b,
                    Entailer& entailer) {
  const size_t na = a.steps.size();
  const size_t nb = b.steps.size();
  if (na == 0 || nb == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "CoT agreement needs at least one step on each side");
  }
  std::vector<char> row_hit(na, 0);
  std::vector<char> col_hit(nb, 0);
  for (size_t i = 0; i < na; ++i) {
    for (size_t j = 0; j < nb; ++j) {
      if (entailer.Entails(a.steps[i].text, b.steps[j].text)) {
        row_hit[i] = 1;
        col_hit[j] = 1;
      }
    }
  }
  int hits = 0;
  for (char h : row_hit) hits += h;
  for (char h : col_hit) hits += h;
  return static_cast<double>(hits) / static_cast<double>(na + nb);
}

ConfidenceScore CoTUncertainty(const CoTExplanation& original,
                               const std::vector<CoTExplanation>& perturbed,
                               Entailer& entailer) {
  if (perturbed.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "uncertainty needs at least one perturbed explanation");
  }
  std::vector<double> scores;
  scores.reserve(perturbed.size());
  for (const auto& p : perturbed) {
    scores.push_back(CoTAgreement(p, original, entailer));
  }
  return ConfidenceScore(SortedMean(std::move(scores)));
}

ConfidenceScore CoTUncertainty(const ProbingSet& set, Entailer& entailer) {
  const auto* original = std::get_if<CoTExplanation>(&set.original.explanation);
  if (original == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "probing set does not hold chain-of-thought explanations",
                set.question.id);
  }
  std::vector<CoTExplanation> perturbed;
  perturbed.reserve(set.perturbed.size());
  for (const auto& r : set.perturbed) {
    const auto* cot = std::get_if<CoTExplanation>(&r.explanation);
    if (cot == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mixed explanation kinds in probing set", set.question.id);
    }
    perturbed.push_back(*cot);
  }
  return CoTUncertainty(*original, perturbed, entailer);
}

}  // namespace nleu
