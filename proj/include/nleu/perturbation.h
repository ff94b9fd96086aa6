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

// Probing sets: an original explanation plus N explanations collected under
// perturbation, either of the input (paraphrases) or of the sampler
// (temperature draws).

#ifndef NLEU_PERTURBATION_H_
#define NLEU_PERTURBATION_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nleu/domain.h"
#include "nleu/prompting.h"

namespace nleu {

class ModelGateway;

enum class ProbingStrategy { kSampleProbing, kModelProbing };

std::string_view ProbingStrategyName(ProbingStrategy strategy);
std::optional<ProbingStrategy> ParseProbingStrategy(std::string_view name);

// A recoverable problem attached to a question (dropped perturbation,
// clamped confidence, unparseable prefix answer, ...).
struct Diagnostic {
  std::string question_id;
  std::string provenance;
  std::string code;
  std::string message;
  std::string line;
};

struct ProbingSet {
  Question question;
  ExplanationMode mode = ExplanationMode::kTokenImportance;
  ProbingStrategy strategy = ProbingStrategy::kSampleProbing;
  int requested_n = 0;
  ExplanationRecord original;
  // perturbed[i].provenance.index == i + 1.
  std::vector<ExplanationRecord> perturbed;
  std::vector<Diagnostic> diagnostics;

  int n_effective() const { return static_cast<int>(perturbed.size()); }
};

struct ElicitationOptions {
  std::string model_name;
  // Model asked for paraphrases; empty means `model_name`.
  std::string paraphrase_model;
  int max_tokens = 512;
  PromptStyle style = PromptStyle::kProbing;
  // Temperature of the original explanation and of paraphrase explanations.
  double base_temperature = 0.0;
};

// Sends the explanation prompt for `q` and parses the response. Parse errors
// propagate as `Error`; parser warnings are appended to `diagnostics` when
// given.
ExplanationRecord ElicitExplanation(ModelGateway& gateway, const Question& q,
                                    ExplanationMode mode,
                                    const ElicitationOptions& options,
                                    Provenance provenance, double temperature,
                                    int sample_index,
                                    std::vector<Diagnostic>* diagnostics =
                                        nullptr);

// Asks for paraphrases of `q` and keeps the first `n` that are distinct after
// normalization and differ from the original. One re-prompt (as draw 1) is
// made when fewer than `n` usable paraphrases come back.
std::vector<std::string> CollectParaphrases(ModelGateway& gateway,
                                            const Question& q, int n,
                                            const ElicitationOptions& options,
                                            std::vector<Diagnostic>* diagnostics =
                                                nullptr);

// Errors: kEmptyParaphraseSet, kAllPerturbationsFailed, and any error from
// eliciting the original explanation. `paraphraser` defaults to `gateway`.
ProbingSet SampleProbe(ModelGateway& gateway, const Question& q,
                       ExplanationMode mode, int n,
                       const ElicitationOptions& options,
                       ModelGateway* paraphraser = nullptr);

// The explanation prompt issued `n` times at temperature `tau`. Errors:
// kAllPerturbationsFailed, and any error from the original explanation.
ProbingSet ModelProbe(ModelGateway& gateway, const Question& q,
                      ExplanationMode mode, int n, double tau,
                      const ElicitationOptions& options);

}  // namespace nleu

#endif  // NLEU_PERTURBATION_H_
