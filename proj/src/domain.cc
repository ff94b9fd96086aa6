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

#include "nleu/domain.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <unordered_set>

#include "nleu/errors.h"

namespace nleu {
namespace {

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)); }
bool IsPunct(char c) { return std::ispunct(static_cast<unsigned char>(c)); }
bool IsDigit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view DatasetKindName(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kMathWord:
      return "mathword";
    case DatasetKind::kYesNo:
      return "yesno";
    case DatasetKind::kPlausibility:
      return "plausibility";
  }
  throw Error(ErrorCode::kUnsupportedDatasetKind, "unknown dataset kind");
}

std::optional<DatasetKind> ParseDatasetKind(std::string_view name) {
  const std::string n = ToLower(name);
  if (n == "mathword" || n == "math_word" || n == "math") {
    return DatasetKind::kMathWord;
  }
  if (n == "yesno" || n == "yes_no") return DatasetKind::kYesNo;
  if (n == "plausibility" || n == "plausible_implausible") {
    return DatasetKind::kPlausibility;
  }
  return std::nullopt;
}

std::string_view ExplanationModeName(ExplanationMode mode) {
  return mode == ExplanationMode::kTokenImportance ? "ti" : "cot";
}

std::optional<ExplanationMode> ParseExplanationMode(std::string_view name) {
  const std::string n = ToLower(name);
  if (n == "ti" || n == "token_importance") {
    return ExplanationMode::kTokenImportance;
  }
  if (n == "cot" || n == "chain_of_thought") {
    return ExplanationMode::kChainOfThought;
  }
  return std::nullopt;
}

std::string NormalizeToken(std::string_view raw) {
  std::string collapsed;
  collapsed.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (IsSpace(c)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) collapsed.push_back(' ');
    pending_space = false;
    collapsed.push_back(
        static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  size_t begin = 0;
  size_t end = collapsed.size();
  while (begin < end && (IsPunct(collapsed[begin]) || IsSpace(collapsed[begin]))) {
    ++begin;
  }
  while (end > begin && (IsPunct(collapsed[end - 1]) || IsSpace(collapsed[end - 1]))) {
    --end;
  }
  return collapsed.substr(begin, end - begin);
}

std::vector<std::string> NormalizedWords(std::string_view text) {
  std::vector<std::string> words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    size_t j = i;
    while (j < text.size() && !IsSpace(text[j])) ++j;
    if (j > i) {
      std::string w = NormalizeToken(text.substr(i, j - i));
      if (!w.empty()) words.push_back(std::move(w));
    }
    i = j;
  }
  return words;
}

std::optional<Decimal> Decimal::Parse(std::string_view text) {
  size_t b = 0;
  size_t e = text.size();
  while (b < e && IsSpace(text[b])) ++b;
  while (e > b && IsSpace(text[e - 1])) --e;
  std::string_view s = text.substr(b, e - b);
  if (s.empty()) return std::nullopt;

  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  const size_t dot = s.find('.');
  std::string_view int_part = s.substr(0, dot);
  std::string_view frac_part =
      dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (int_part.empty() && frac_part.empty()) return std::nullopt;

  // Thousands separators must sit between groups of exactly three digits.
  std::string int_digits;
  if (int_part.find(',') != std::string_view::npos) {
    static const std::regex kGrouped(R"(\d{1,3}(,\d{3})+)");
    if (!std::regex_match(int_part.begin(), int_part.end(), kGrouped)) {
      return std::nullopt;
    }
    for (char c : int_part) {
      if (c != ',') int_digits.push_back(c);
    }
  } else {
    int_digits = std::string(int_part);
  }
  for (char c : int_digits) {
    if (!IsDigit(c)) return std::nullopt;
  }
  for (char c : frac_part) {
    if (!IsDigit(c)) return std::nullopt;
  }

  const size_t first_nonzero = int_digits.find_first_not_of('0');
  std::string int_canon = first_nonzero == std::string::npos
                              ? std::string("0")
                              : int_digits.substr(first_nonzero);
  std::string frac_canon(frac_part);
  while (!frac_canon.empty() && frac_canon.back() == '0') frac_canon.pop_back();

  std::string canonical = int_canon;
  if (!frac_canon.empty()) canonical += "." + frac_canon;
  if (negative && canonical != "0") canonical = "-" + canonical;
  return Decimal(std::move(canonical));
}

std::optional<Answer> ParseAnswer(std::string_view text, DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kMathWord: {
      static const std::regex kNumber(
          R"(-?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?|-?\.\d+)");
      std::match_results<std::string_view::const_iterator> m;
      if (!std::regex_search(text.begin(), text.end(), m, kNumber)) {
        return std::nullopt;
      }
      auto d = Decimal::Parse(m.str());
      if (!d) return std::nullopt;
      return Answer{*d};
    }
    case DatasetKind::kYesNo:
      for (const auto& w : NormalizedWords(text)) {
        if (w == "yes") return Answer{YesNo{true}};
        if (w == "no") return Answer{YesNo{false}};
      }
      return std::nullopt;
    case DatasetKind::kPlausibility:
      for (const auto& w : NormalizedWords(text)) {
        if (w == "plausible") return Answer{Plausibility::kPlausible};
        if (w == "implausible") return Answer{Plausibility::kImplausible};
      }
      return std::nullopt;
  }
  throw Error(ErrorCode::kUnsupportedDatasetKind, "unknown dataset kind");
}

std::string AnswerToString(const Answer& answer) {
  struct Visitor {
    std::string operator()(const Decimal& d) const { return d.ToString(); }
    std::string operator()(const YesNo& y) const { return y.value ? "Yes" : "No"; }
    std::string operator()(Plausibility p) const {
      return p == Plausibility::kPlausible ? "plausible" : "implausible";
    }
  };
  return std::visit(Visitor{}, answer);
}

DatasetKind AnswerKind(const Answer& answer) {
  switch (answer.index()) {
    case 0:
      return DatasetKind::kMathWord;
    case 1:
      return DatasetKind::kYesNo;
    default:
      return DatasetKind::kPlausibility;
  }
}

bool AnswersEqual(const Answer& a, const Answer& b) { return a == b; }

ConfidenceScore::ConfidenceScore(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "confidence must lie in [0, 1], got " + std::to_string(value));
  }
}

ConfidenceScore ConfidenceScore::FromPercent(double percent, bool* clamped) {
  double unit = percent / 100.0;
  bool was_clamped = false;
  if (!(unit >= 0.0)) {  // also catches NaN
    unit = 0.0;
    was_clamped = true;
  } else if (unit > 1.0) {
    unit = 1.0;
    was_clamped = true;
  }
  if (clamped != nullptr) *clamped = was_clamped;
  return ConfidenceScore(unit);
}

TokenImportanceExplanation::TokenImportanceExplanation(
    std::vector<TokenWeight> entries) {
  std::unordered_set<std::string> seen;
  entries_.reserve(entries.size());
  for (auto& e : entries) {
    std::string token = NormalizeToken(e.token);
    if (token.empty() || !seen.insert(token).second) continue;
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "importance weight must be finite and non-negative", token);
    }
    entries_.push_back({std::move(token), e.weight});
  }
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const TokenWeight& a, const TokenWeight& b) {
                     return a.weight > b.weight;
                   });
}

TokenImportanceExplanation TokenImportanceExplanation::FromWeights(
    std::vector<TokenWeight> entries) {
  TokenImportanceExplanation ti(std::move(entries));
  double total = 0.0;
  for (const auto& e : ti.entries_) total += e.weight;
  if (total > 0.0) {
    for (auto& e : ti.entries_) e.weight /= total;
  }
  return ti;
}

TokenImportanceExplanation TokenImportanceExplanation::FromRanking(
    const std::vector<std::string>& ranked) {
  // Deduplicate first so synthetic weights stay strictly decreasing.
  std::vector<std::string> unique;
  std::unordered_set<std::string> seen;
  for (const auto& r : ranked) {
    std::string t = NormalizeToken(r);
    if (!t.empty() && seen.insert(t).second) unique.push_back(std::move(t));
  }
  const double n = static_cast<double>(unique.size());
  std::vector<TokenWeight> weighted;
  weighted.reserve(unique.size());
  for (size_t i = 0; i < unique.size(); ++i) {
    weighted.push_back({unique[i], n - static_cast<double>(i)});
  }
  return FromWeights(std::move(weighted));
}

std::vector<std::string> TokenImportanceExplanation::TopTokens(int k) const {
  std::vector<std::string> top;
  const size_t limit =
      k <= 0 ? 0 : std::min(entries_.size(), static_cast<size_t>(k));
  top.reserve(limit);
  for (size_t i = 0; i < limit; ++i) top.push_back(entries_[i].token);
  return top;
}

ExplanationMode ExplanationModeOf(const Explanation& explanation) {
  return std::holds_alternative<TokenImportanceExplanation>(explanation)
             ? ExplanationMode::kTokenImportance
             : ExplanationMode::kChainOfThought;
}

std::string Provenance::ToString() const {
  switch (kind) {
    case Kind::kOriginal:
      return "original";
    case Kind::kParaphrase:
      return "paraphrase:" + std::to_string(index);
    case Kind::kTemperatureSample:
      return "sample:" + std::to_string(index);
  }
  return "unknown";
}

}  // namespace nleu
