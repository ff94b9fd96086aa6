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

// Shared value types: questions, typed answers, confidence scores and the two
// explanation shapes (token importance, chain of thought). All types are
// immutable after construction.

#ifndef NLEU_DOMAIN_H_
#define NLEU_DOMAIN_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace nleu {

enum class DatasetKind { kMathWord, kYesNo, kPlausibility };

// Canonical names are "mathword", "yesno" and "plausibility". Parsing also
// accepts a few aliases ("math_word", "yes_no", "plausible_implausible").
std::string_view DatasetKindName(DatasetKind kind);
std::optional<DatasetKind> ParseDatasetKind(std::string_view name);

enum class ExplanationMode { kTokenImportance, kChainOfThought };

std::string_view ExplanationModeName(ExplanationMode mode);  // "ti" / "cot"
std::optional<ExplanationMode> ParseExplanationMode(std::string_view name);

// Lowercases, collapses internal whitespace and strips leading/trailing
// punctuation. Idempotent. May return an empty string.
std::string NormalizeToken(std::string_view raw);

// Splits on whitespace and normalizes each piece, dropping empty results.
std::vector<std::string> NormalizedWords(std::string_view text);

// Exact decimal number. Two decimals compare equal iff they denote the same
// rational value ("28" == "28.0" == "028").
class Decimal {
 public:
  Decimal() : canonical_("0") {}

  // Accepts an optional sign, digits, an optional fractional part and
  // thousands separators (","). Returns nullopt on anything else.
  static std::optional<Decimal> Parse(std::string_view text);

  // Canonical form: no leading zeros, no trailing fractional zeros, "-0" is
  // "0".
  const std::string& ToString() const { return canonical_; }

  friend bool operator==(const Decimal& a, const Decimal& b) {
    return a.canonical_ == b.canonical_;
  }

 private:
  explicit Decimal(std::string canonical) : canonical_(std::move(canonical)) {}
  std::string canonical_;
};

struct YesNo {
  bool value = false;
  friend bool operator==(const YesNo&, const YesNo&) = default;
};

enum class Plausibility { kPlausible, kImplausible };

using Answer = std::variant<Decimal, YesNo, Plausibility>;

// Parses an answer string under the rules of `kind`. The numeric variant takes
// the first number in the text; yes/no and plausibility take the first
// matching word.
std::optional<Answer> ParseAnswer(std::string_view text, DatasetKind kind);
std::string AnswerToString(const Answer& answer);
DatasetKind AnswerKind(const Answer& answer);

// Same variant and same value. A variant mismatch is simply `false`.
bool AnswersEqual(const Answer& a, const Answer& b);

class ConfidenceScore {
 public:
  // Throws kInvalidArgument outside [0, 1].
  explicit ConfidenceScore(double value);

  // Converts a 0-100 percentage, clamping out-of-range input. `clamped` is set
  // when clamping happened.
  static ConfidenceScore FromPercent(double percent, bool* clamped = nullptr);

  double value() const { return value_; }

  friend bool operator==(const ConfidenceScore&,
                         const ConfidenceScore&) = default;

 private:
  double value_;
};

struct Question {
  std::string id;
  std::string text;
  DatasetKind kind = DatasetKind::kMathWord;
  std::optional<Answer> gold_answer;
};

struct TokenWeight {
  std::string token;
  double weight = 0.0;
  friend bool operator==(const TokenWeight&, const TokenWeight&) = default;
};

// Rank-ordered important words. Entries are normalized, unique, and sorted by
// weight descending with ties kept in input order.
class TokenImportanceExplanation {
 public:
  TokenImportanceExplanation() = default;

  // Normalizes tokens, drops empty ones and later duplicates, then sorts.
  // Weights are taken as given (no renormalization).
  explicit TokenImportanceExplanation(std::vector<TokenWeight> entries);

  // Rescales weights to sum to 1 when their total is positive.
  static TokenImportanceExplanation FromWeights(
      std::vector<TokenWeight> entries);

  // Assigns n-i+1 to the i-th of n ranked words and renormalizes.
  static TokenImportanceExplanation FromRanking(
      const std::vector<std::string>& ranked);

  const std::vector<TokenWeight>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // First `k` tokens (or all of them when fewer).
  std::vector<std::string> TopTokens(int k) const;

  friend bool operator==(const TokenImportanceExplanation&,
                         const TokenImportanceExplanation&) = default;

 private:
  std::vector<TokenWeight> entries_;
};

struct CoTStep {
  std::string text;
  std::optional<ConfidenceScore> confidence;
  friend bool operator==(const CoTStep&, const CoTStep&) = default;
};

struct CoTExplanation {
  std::vector<CoTStep> steps;
  friend bool operator==(const CoTExplanation&,
                         const CoTExplanation&) = default;
};

using Explanation = std::variant<TokenImportanceExplanation, CoTExplanation>;

ExplanationMode ExplanationModeOf(const Explanation& explanation);

struct GenerationParams {
  double temperature = 0.0;
  std::string model_name;
  int max_tokens = 512;
  std::optional<int64_t> seed;
};

struct Provenance {
  enum class Kind { kOriginal, kParaphrase, kTemperatureSample };
  Kind kind = Kind::kOriginal;
  int index = 0;  // 1-based for perturbations, 0 for the original.

  static Provenance Original() { return {}; }
  static Provenance Paraphrase(int i) { return {Kind::kParaphrase, i}; }
  static Provenance TemperatureSample(int i) {
    return {Kind::kTemperatureSample, i};
  }

  // "original", "paraphrase:3", "sample:2".
  std::string ToString() const;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// One elicitation: the prompt sent, the raw text received and what was parsed
// from it.
struct ExplanationRecord {
  std::string question_id;
  std::string question_text;
  std::string prompt_text;
  std::string raw_response;
  Explanation explanation;
  Answer answer;
  std::optional<ConfidenceScore> verbalized_confidence;
  GenerationParams generation;
  Provenance provenance;
};

}  // namespace nleu

#endif  // NLEU_DOMAIN_H_
