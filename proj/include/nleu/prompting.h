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

// Prompt construction. Template text lives in assets/prompts/*.prompt and is
// compiled into the library; this module only selects and fills templates.
//
// Placeholders are written `{name}`. A template must contain each of its
// placeholders exactly once.

#ifndef NLEU_PROMPTING_H_
#define NLEU_PROMPTING_H_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nleu/domain.h"

namespace nleu {

// kVerbalized: word weights / per-step confidences plus an overall confidence.
// kProbing: the dataset-tailored ranked-word and step formats used when
// collecting perturbed explanations.
enum class PromptStyle { kVerbalized, kProbing };

std::string_view PromptStyleName(PromptStyle style);

enum class TemplateMode {
  kTokenImportance,
  kChainOfThought,
  kParaphrase,
  kEarlyAnswer,
  kEntailmentJudge,
  kSynonym,
};

class PromptTemplate {
 public:
  // Asset names follow `<mode>_<style>_<dataset>` for explanation templates,
  // `early_answer_<dataset>` for early answering, and plain `paraphrase`,
  // `entailment_judge`, `synonym` for the rest.
  static PromptTemplate Load(TemplateMode mode, PromptStyle style,
                             DatasetKind kind);
  static PromptTemplate Load(TemplateMode mode);  // dataset-independent ones
  static PromptTemplate FromAsset(std::string_view asset_name,
                                  TemplateMode mode);

  TemplateMode mode() const { return mode_; }
  const std::string& name() const { return name_; }
  const std::string& text() const { return text_; }

  // Substitutes every placeholder. Throws kInvalidArgument when a slot is
  // missing from `slots`, or a placeholder is absent or repeated.
  std::string Render(const std::map<std::string, std::string>& slots) const;

 private:
  PromptTemplate(std::string name, std::string text, TemplateMode mode);

  std::string name_;
  std::string text_;
  TemplateMode mode_;
};

// Names of every bundled prompt asset, sorted.
std::vector<std::string> PromptAssetNames();
std::string_view PromptAssetText(std::string_view asset_name);

std::string BuildTokenImportancePrompt(
    const Question& q, PromptStyle style = PromptStyle::kVerbalized);
std::string BuildCoTPrompt(const Question& q,
                           PromptStyle style = PromptStyle::kVerbalized);
std::string BuildExplanationPrompt(const Question& q, ExplanationMode mode,
                                   PromptStyle style);
std::string BuildParaphrasePrompt(const Question& q);

// Question followed by "Step 1: ...", one line per step in `prefix`.
std::string BuildEarlyAnswerPrompt(const Question& q,
                                   std::span<const CoTStep> prefix);
std::string BuildEntailmentPrompt(std::string_view premise,
                                  std::string_view hypothesis);
std::string BuildSynonymPrompt(std::string_view word,
                               std::string_view question_text);

}  // namespace nleu

#endif  // NLEU_PROMPTING_H_
