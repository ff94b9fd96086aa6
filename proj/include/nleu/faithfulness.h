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

// Faithfulness tests for explanations.
//
// Token importance: swap the top-k important words for synonyms, ask for a
// new explanation of the edited question, and score it by token rank
// agreement against the original explanation with the same swaps applied.
//
// Chain of thought (early answering): re-ask the question with only the first
// t steps, t = 1..n, and report the fraction of prefixes whose answer equals
// the answer reached with the full chain.

#ifndef NLEU_FAITHFULNESS_H_
#define NLEU_FAITHFULNESS_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nleu/domain.h"
#include "nleu/perturbation.h"

namespace nleu {

class ModelGateway;

class SynonymProvider {
 public:
  virtual ~SynonymProvider() = default;
  // nullopt when no synonym is known.
  virtual std::optional<std::string> Synonym(const std::string& word,
                                             const std::string& question) = 0;
};

// Static word -> synonym table; lookups use normalized words.
class WordlistSynonyms : public SynonymProvider {
 public:
  explicit WordlistSynonyms(std::map<std::string, std::string> table);
  // JSON object {"word": "synonym", ...}.
  static WordlistSynonyms FromFile(const std::filesystem::path& path);

  std::optional<std::string> Synonym(const std::string& word,
                                     const std::string& question) override;

 private:
  std::map<std::string, std::string> table_;
};

// Asks the model for a synonym usable in the question (temperature 0).
class LlmSynonyms : public SynonymProvider {
 public:
  LlmSynonyms(ModelGateway& gateway, std::string model_name);
  std::optional<std::string> Synonym(const std::string& word,
                                     const std::string& question) override;

 private:
  ModelGateway& gateway_;
  std::string model_name_;
};

struct Substitution {
  std::string text;
  // Normalized original token -> replacement, in target order.
  std::vector<std::pair<std::string, std::string>> replacements;
  // Targets for which the provider had no synonym.
  std::vector<std::string> skipped;
};

// Replaces every occurrence of each target (matched on normalized words;
// multi-word targets match consecutive words) keeping surrounding
// punctuation. Throws kTargetNotFound when a target does not occur.
Substitution SynonymSubstitute(const Question& q,
                               const std::vector<std::string>& targets,
                               SynonymProvider& provider);

struct CounterfactualResult {
  double score = 0.0;
  std::string substituted_question;
  std::vector<std::pair<std::string, std::string>> replacements;
  std::vector<std::string> skipped;    // no synonym
  std::vector<std::string> not_found;  // not present in the question
  TokenImportanceExplanation expected;
  TokenImportanceExplanation observed;
};

// TR(new explanation, expected explanation, k). The expected explanation is
// `ti` with its top-k tokens renamed by the substitution map.
CounterfactualResult TokenImportanceCounterfactual(
    ModelGateway& gateway, const Question& q,
    const TokenImportanceExplanation& ti, int k, SynonymProvider& provider,
    const ElicitationOptions& options);

struct EarlyAnsweringResult {
  double matching_fraction = 0.0;
  // Answer parsed for prefixes 1..n; nullopt when it could not be read.
  std::vector<std::optional<Answer>> prefix_answers;
  std::vector<Diagnostic> diagnostics;
};

EarlyAnsweringResult CoTEarlyAnswering(ModelGateway& gateway,
                                       const Question& q,
                                       const CoTExplanation& cot,
                                       const Answer& full_answer,
                                       const ElicitationOptions& options);

}  // namespace nleu

#endif  // NLEU_FAITHFULNESS_H_
