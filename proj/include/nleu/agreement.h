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

// Agreement metrics between explanations and the probing confidence scores
// built on them.
//
// Token rank agreement (TR) counts the top-k tokens that sit at the same rank
// in both explanations, divided by k. Chain-of-thought agreement (CoTA) is
//
//   CoTA(a, b) = (sum_i max_j E(a_i, b_j) + sum_j max_i E(a_i, b_j))
//                / (|a| + |b|)
//
// with a binary step entailment E. Both confidence scores are the mean
// agreement of the perturbed explanations with the original one.

#ifndef NLEU_AGREEMENT_H_
#define NLEU_AGREEMENT_H_

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nleu/domain.h"

namespace nleu {

class ModelGateway;
struct ProbingSet;

// Number of top-k positions where both explanations hold the same token.
// Explanations shorter than k contribute only the positions they have.
int TokenRankMatches(const TokenImportanceExplanation& a,
                     const TokenImportanceExplanation& b, int k);

// TokenRankMatches / k. Requires k >= 1.
double TokenRankAgreement(const TokenImportanceExplanation& a,
                          const TokenImportanceExplanation& b, int k);

// |top-k(a) ∩ top-k(b)| / k, ignoring rank. Requires k >= 1.
double TokenSetAgreement(const TokenImportanceExplanation& a,
                         const TokenImportanceExplanation& b, int k);

// Mean TR between each perturbed explanation and the original. The matches
// are summed as integers, so the result is exact and independent of record
// order. Throws kInvalidArgument on an empty or non-TI set.
ConfidenceScore TokenImportanceUncertainty(const ProbingSet& set, int k = 3);

// Same reduction over explicit explanations.
ConfidenceScore TokenImportanceUncertainty(
    const TokenImportanceExplanation& original,
    const std::vector<TokenImportanceExplanation>& perturbed, int k = 3);

struct EntailmentBackendSpec {
  enum class Kind { kExactMatch, kNormalizedOverlap, kLlmJudge };
  Kind kind = Kind::kNormalizedOverlap;
  double threshold = 0.6;  // kNormalizedOverlap only
  // Require entailment in both directions (the default reading). Setting this
  // to false accepts a single direction.
  bool bidirectional = true;
  std::string model_name;  // kLlmJudge only

  // "exact", "overlap", "overlap:0.8", "llm".
  static EntailmentBackendSpec Parse(std::string_view text);
  std::string ToString() const;
};

// Binary step entailment E(s_i, s_j).
class Entailer {
 public:
  virtual ~Entailer() = default;
  virtual bool Entails(std::string_view a, std::string_view b) = 0;
};

class ExactMatchEntailer : public Entailer {
 public:
  bool Entails(std::string_view a, std::string_view b) override;
};

// Jaccard similarity of the normalized word sets, thresholded. Symmetric.
class OverlapEntailer : public Entailer {
 public:
  explicit OverlapEntailer(double threshold);
  bool Entails(std::string_view a, std::string_view b) override;

 private:
  double threshold_;
};

double WordJaccard(std::string_view a, std::string_view b);

// Asks the model for an NLI label ("entailment" / "contradiction" /
// "neutral") in each direction. Judgements are memoized per ordered pair.
class LlmJudgeEntailer : public Entailer {
 public:
  LlmJudgeEntailer(ModelGateway& gateway, std::string model_name,
                   bool bidirectional = true, int max_tokens = 16);
  bool Entails(std::string_view a, std::string_view b) override;

 private:
  bool Directional(const std::string& premise, const std::string& hypothesis);

  ModelGateway& gateway_;
  std::string model_name_;
  bool bidirectional_;
  int max_tokens_;
  std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, bool> memo_;
};

enum class NliLabel { kEntailment, kContradiction, kNeutral };

// First label word found in a judge response; kJudgeUnparseable otherwise.
NliLabel ParseNliLabel(std::string_view response);

// `gateway` may be null unless spec.kind is kLlmJudge.
std::unique_ptr<Entailer> MakeEntailer(const EntailmentBackendSpec& spec,
                                       ModelGateway* gateway);

// Evaluates every step pair once. Throws kInvalidArgument if either
// explanation has no steps.
double CoTAgreement(const CoTExplanation& a, const CoTExplanation& b,
                    Entailer& entailer);

// Mean CoTA of perturbed explanations against the original. Per-record scores
// are summed in sorted order so the mean does not depend on record order.
ConfidenceScore CoTUncertainty(const ProbingSet& set, Entailer& entailer);
ConfidenceScore CoTUncertainty(const CoTExplanation& original,
                               const std::vector<CoTExplanation>& perturbed,
                               Entailer& entailer);

}  // namespace nleu

#endif  // NLEU_AGREEMENT_H_
