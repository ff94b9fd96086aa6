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

#include "nleu/prompting.h"

#include <algorithm>
#include <utility>

#include "nleu/errors.h"

namespace nleu {
namespace internal {
extern const std::pair<std::string_view, std::string_view> kPromptAssets[];
extern const int kPromptAssetCount;
}  // namespace internal

namespace {

std::vector<std::string> RequiredSlots(TemplateMode mode) {
  switch (mode) {
    case TemplateMode::kTokenImportance:
    case TemplateMode::kChainOfThought:
    case TemplateMode::kParaphrase:
      return {"question"};
    case TemplateMode::kEarlyAnswer:
      return {"question", "reasoning"};
    case TemplateMode::kEntailmentJudge:
      return {"premise", "hypothesis"};
    case TemplateMode::kSynonym:
      return {"word", "question"};
  }
  return {};
}

size_t CountOccurrences(std::string_view haystack, std::string_view needle) {
  size_t count = 0;
  for (size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace

std::string_view PromptStyleName(PromptStyle style) {
  return style == PromptStyle::kVerbalized ? "verbalized" : "probing";
}

std::vector<std::string> PromptAssetNames() {
  std::vector<std::string> names;
  for (int i = 0; i < internal::kPromptAssetCount; ++i) {
    names.emplace_back(internal::kPromptAssets[i].first);
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::string_view PromptAssetText(std::string_view asset_name) {
  for (int i = 0; i < internal::kPromptAssetCount; ++i) {
    if (internal::kPromptAssets[i].first == asset_name) {
      return internal::kPromptAssets[i].second;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown prompt asset",
              std::string(asset_name));
}

PromptTemplate::PromptTemplate(std::string name, std::string text,
                               TemplateMode mode)
    : name_(std::move(name)), text_(std::move(text)), mode_(mode) {
  for (const auto& slot : RequiredSlots(mode_)) {
    const size_t n = CountOccurrences(text_, "{" + slot + "}");
    if (n != 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "template must contain exactly one {" + slot + "} slot",
                  name_);
    }
  }
}

PromptTemplate PromptTemplate::FromAsset(std::string_view asset_name,
                                         TemplateMode mode) {
  return PromptTemplate(std::string(asset_name),
                        std::string(PromptAssetText(asset_name)), mode);
}

PromptTemplate PromptTemplate::Load(TemplateMode mode, PromptStyle style,
                                    DatasetKind kind) {
  const std::string dataset(DatasetKindName(kind));
  switch (mode) {
    case TemplateMode::kTokenImportance:
      return FromAsset("ti_" + std::string(PromptStyleName(style)) + "_" +
                           dataset,
                       mode);
    case TemplateMode::kChainOfThought:
      return FromAsset("cot_" + std::string(PromptStyleName(style)) + "_" +
                           dataset,
                       mode);
    case TemplateMode::kEarlyAnswer:
      return FromAsset("early_answer_" + dataset, mode);
    default:
      return Load(mode);
  }
}

PromptTemplate PromptTemplate::Load(TemplateMode mode) {
  switch (mode) {
    case TemplateMode::kParaphrase:
      return FromAsset("paraphrase", mode);
    case TemplateMode::kEntailmentJudge:
      return FromAsset("entailment_judge", mode);
    case TemplateMode::kSynonym:
      return FromAsset("synonym", mode);
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  "template mode needs a dataset kind");
  }
}

std::string PromptTemplate::Render(
    const std::map<std::string, std::string>& slots) const {
  // Locate every placeholder in the template first, then splice, so that
  // slot values containing "{...}" are never re-expanded.
  std::vector<std::pair<size_t, std::string>> spans;
  for (const auto& slot : RequiredSlots(mode_)) {
    auto it = slots.find(slot);
    if (it == slots.end()) {
      throw Error(ErrorCode::kInvalidArgument, "missing prompt slot", slot);
    }
    spans.emplace_back(text_.find("{" + slot + "}"), slot);
  }
  std::sort(spans.begin(), spans.end());
  std::string out;
  size_t cursor = 0;
  for (const auto& [pos, slot] : spans) {
    out.append(text_, cursor, pos - cursor);
    out += slots.at(slot);
    cursor = pos + slot.size() + 2;
  }
  out.append(text_, cursor, std::string::npos);
  return out;
}

std::string BuildTokenImportancePrompt(const Question& q, PromptStyle style) {
  return PromptTemplate::Load(TemplateMode::kTokenImportance, style, q.kind)
      .Render({{"question", q.text}});
}

std::string BuildCoTPrompt(const Question& q, PromptStyle style) {
  return PromptTemplate::Load(TemplateMode::kChainOfThought, style, q.kind)
      .Render({{"question", q.text}});
}

std::string BuildExplanationPrompt(const Question& q, ExplanationMode mode,
                                   PromptStyle style) {
  return mode == ExplanationMode::kTokenImportance
             ? BuildTokenImportancePrompt(q, style)
             : BuildCoTPrompt(q, style);
}

std::string BuildParaphrasePrompt(const Question& q) {
  if (q.text.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "question text is empty", q.id);
  }
  return PromptTemplate::Load(TemplateMode::kParaphrase)
      .Render({{"question", q.text}});
}

std::string BuildEarlyAnswerPrompt(const Question& q,
                                   std::span<const CoTStep> prefix) {
  std::string reasoning;
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (i > 0) reasoning += '\n';
    reasoning += "Step " + std::to_string(i + 1) + ": " + prefix[i].text;
  }
  return PromptTemplate::Load(TemplateMode::kEarlyAnswer,
                              PromptStyle::kProbing, q.kind)
      .Render({{"question", q.text}, {"reasoning", reasoning}});
}

std::string BuildEntailmentPrompt(std::string_view premise,
                                  std::string_view hypothesis) {
  return PromptTemplate::Load(TemplateMode::kEntailmentJudge)
      .Render({{"premise", std::string(premise)},
               {"hypothesis", std::string(hypothesis)}});
}

std::string BuildSynonymPrompt(std::string_view word,
                               std::string_view question_text) {
  return PromptTemplate::Load(TemplateMode::kSynonym)
      .Render({{"word", std::string(word)},
               {"question", std::string(question_text)}});
}

}  // namespace nleu
