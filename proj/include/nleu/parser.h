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

// Parsers for the response formats the prompts ask for. Matching of the
// final-answer line is case-insensitive and ignores markdown emphasis; every
// failure is an `Error` whose context is the offending line.

#ifndef NLEU_PARSER_H_
#define NLEU_PARSER_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nleu/domain.h"

namespace nleu {

struct FinalAnswer {
  Answer answer;
  std::optional<ConfidenceScore> confidence;
};

// Finds the last "Final answer and overall confidence (0-100): <answer>,
// <confidence>%" line. Errors: kMissingFinalAnswer, kMalformedAnswer.
FinalAnswer ParseFinalAnswer(std::string_view text, DatasetKind kind,
                             std::vector<std::string>* warnings = nullptr);

struct TokenImportanceParse {
  TokenImportanceExplanation explanation;
  Answer answer;
  std::optional<ConfidenceScore> confidence;
  // Sum of the importance values as written (before renormalization). For
  // rank-only responses this is the sum of the synthetic n-i+1 weights.
  double raw_weight_total = 0.0;
  bool rank_only = false;
  std::vector<std::string> warnings;
};

// Accepts both "Word: X, Importance: Y%" lines and numbered "1. X" lists.
// Errors: kMissingFinalAnswer, kNoTokens, kMalformedAnswer.
TokenImportanceParse ParseTokenImportance(std::string_view text,
                                          DatasetKind kind);

struct CoTParse {
  CoTExplanation explanation;
  Answer answer;
  std::optional<ConfidenceScore> confidence;
  std::vector<std::string> warnings;
};

// One step per "Step k:" line; lines between steps continue the previous
// step. Errors: kMissingFinalAnswer, kNoSteps, kMalformedAnswer.
CoTParse ParseCoT(std::string_view text, DatasetKind kind);

// All double-quoted strings in order; when there are none, numbered lines, or
// failing that every non-empty line. Duplicates are kept.
// Errors: kEmptyParaphraseSet.
std::vector<std::string> ParseParaphraseList(std::string_view text);

}  // namespace nleu

#endif  // NLEU_PARSER_H_
