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

#include "nleu/parser.h"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <regex>

#include "nleu/errors.h"

namespace nleu {
namespace {

using std::regex_constants::icase;

// std::regex backtracks recursively; longer lines are not format lines anyway.
constexpr size_t kMaxLineLength = 2000;

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

std::string Trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Drops markdown emphasis markers so "**Step 1**:" reads as "Step 1:".
std::string StripEmphasis(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c != '*' && c != '_' && c != '`') out.push_back(c);
  }
  return out;
}

// strtod never throws; overlong digit strings become +inf.
double ToDouble(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

const std::regex& FinalAnswerAnchor() {
  static const std::regex re(
      R"(final\s+answer\s+and\s+overall\s+confidence\s*(?:\(\s*0\s*-\s*100\s*\))?\s*:?)",
      icase);
  return re;
}

// Index of the last line holding the final-answer anchor, or -1.
int FindFinalAnswerLine(const std::vector<std::string>& lines) {
  for (int i = static_cast<int>(lines.size()) - 1; i >= 0; --i) {
    if (lines[i].size() > kMaxLineLength) continue;
    if (std::regex_search(StripEmphasis(lines[i]), FinalAnswerAnchor())) {
      return i;
    }
  }
  return -1;
}

std::optional<ConfidenceScore> ParsePercent(const std::string& text,
                                            const std::string& line,
                                            std::vector<std::string>* warnings) {
  static const std::regex kNumber(R"([-+]?\d+(?:\.\d+)?)");
  std::smatch m;
  if (!std::regex_search(text, m, kNumber)) return std::nullopt;
  bool clamped = false;
  const ConfidenceScore score =
      ConfidenceScore::FromPercent(ToDouble(m.str()), &clamped);
  if (clamped && warnings != nullptr) {
    warnings->push_back("confidence out of range, clamped: " + line);
  }
  return score;
}

FinalAnswer ParseFinalAnswerAt(const std::vector<std::string>& lines,
                               int index, DatasetKind kind,
                               std::vector<std::string>* warnings) {
  const std::string line = StripEmphasis(lines[index]);
  std::smatch anchor;
  std::regex_search(line, anchor, FinalAnswerAnchor());
  std::string rest = Trim(anchor.suffix().str());
  if (rest.empty()) {
    // Tolerate the answer being put on the following line.
    for (size_t j = index + 1; j < lines.size() && rest.empty(); ++j) {
      rest = Trim(StripEmphasis(lines[j]));
    }
  }
  if (rest.empty()) {
    throw Error(ErrorCode::kMalformedAnswer, "final-answer line has no answer",
                lines[index]);
  }

  // "<answer>, <confidence>%". A comma directly followed by exactly three
  // digits is a thousands separator, not the confidence delimiter.
  std::string answer_part = rest;
  std::string confidence_part;
  static const std::regex kThousands(R"(^\d{3}(?:[^\d%.]|$))");
  for (size_t pos = rest.rfind(','); pos != std::string::npos;
       pos = pos == 0 ? std::string::npos : rest.rfind(',', pos - 1)) {
    const std::string right = rest.substr(pos + 1);
    if (std::regex_search(right, kThousands)) continue;
    answer_part = Trim(rest.substr(0, pos));
    confidence_part = Trim(right);
    break;
  }

  auto answer = ParseAnswer(answer_part, kind);
  if (!answer) {
    throw Error(ErrorCode::kMalformedAnswer,
                "cannot read a " + std::string(DatasetKindName(kind)) +
                    " answer",
                lines[index]);
  }
  FinalAnswer result{*answer, std::nullopt};
  if (!confidence_part.empty()) {
    result.confidence = ParsePercent(confidence_part, lines[index], warnings);
  }
  return result;
}

}  // namespace

FinalAnswer ParseFinalAnswer(std::string_view text, DatasetKind kind,
                             std::vector<std::string>* warnings) {
  const auto lines = SplitLines(text);
  const int index = FindFinalAnswerLine(lines);
  if (index < 0) {
    throw Error(ErrorCode::kMissingFinalAnswer,
                "response has no final-answer line",
                lines.empty() ? std::string() : lines.back());
  }
  return ParseFinalAnswerAt(lines, index, kind, warnings);
}

TokenImportanceParse ParseTokenImportance(std::string_view text,
                                          DatasetKind kind) {
  const auto lines = SplitLines(text);
  const int final_index = FindFinalAnswerLine(lines);
  if (final_index < 0) {
    throw Error(ErrorCode::kMissingFinalAnswer,
                "response has no final-answer line",
                lines.empty() ? std::string() : lines.back());
  }

  static const std::regex kWeighted(
      R"(^\s*(?:[-•]\s*)?word\s*:\s*(.+?)\s*,\s*importance\s*:\s*([-+]?\d+(?:\.\d+)?)\s*%?)",
      icase);
  static const std::regex kRanked(R"(^\s*(\d+)\s*[.)]\s*(.+?)\s*$)");

  std::vector<TokenWeight> weighted;
  std::vector<std::string> ranked;
  for (int i = 0; i < final_index; ++i) {
    if (lines[i].size() > kMaxLineLength) continue;
    const std::string line = StripEmphasis(lines[i]);
    std::smatch m;
    if (std::regex_search(line, m, kWeighted)) {
      weighted.push_back({m[1].str(), ToDouble(m[2].str())});
    } else if (std::regex_match(line, m, kRanked)) {
      ranked.push_back(m[2].str());
    }
  }

  TokenImportanceParse result{.explanation = {},
                              .answer = {},
                              .confidence = std::nullopt,
                              .raw_weight_total = 0.0,
                              .rank_only = weighted.empty(),
                              .warnings = {}};
  if (!weighted.empty()) {
    for (auto& w : weighted) {
      if (!std::isfinite(w.weight)) {
        result.warnings.push_back("unreadable importance for \"" + w.token +
                                  "\" set to 0");
        w.weight = 0.0;
      }
      if (w.weight < 0.0) {
        result.warnings.push_back("negative importance for \"" + w.token +
                                  "\" set to 0");
        w.weight = 0.0;
      }
      result.raw_weight_total += w.weight;
    }
    result.explanation =
        TokenImportanceExplanation::FromWeights(std::move(weighted));
  } else {
    result.explanation = TokenImportanceExplanation::FromRanking(ranked);
    const double n = static_cast<double>(result.explanation.size());
    result.raw_weight_total = n * (n + 1.0) / 2.0;
  }
  if (result.explanation.empty()) {
    throw Error(ErrorCode::kNoTokens, "no important words found",
                final_index > 0 ? lines[0] : lines[final_index]);
  }

  FinalAnswer fa =
      ParseFinalAnswerAt(lines, final_index, kind, &result.warnings);
  result.answer = std::move(fa.answer);
  result.confidence = fa.confidence;
  return result;
}

CoTParse ParseCoT(std::string_view text, DatasetKind kind) {
  const auto lines = SplitLines(text);
  const int final_index = FindFinalAnswerLine(lines);
  if (final_index < 0) {
    throw Error(ErrorCode::kMissingFinalAnswer,
                "response has no final-answer line",
                lines.empty() ? std::string() : lines.back());
  }

  static const std::regex kStep(R"(^\s*step\s*(\d+)\s*[:.)\-]\s*(.*)$)", icase);
  static const std::regex kConfidenceSuffix(
      R"([,;\s]*\(?\s*confidence(?:\s+level)?\s*[:=]?\s*([-+]?\d+(?:\.\d+)?)\s*%?\s*\)?\s*\.?\s*$)",
      icase);

  CoTParse result{.explanation = {},
                  .answer = {},
                  .confidence = std::nullopt,
                  .warnings = {}};
  std::vector<std::pair<std::string, std::string>> raw_steps;  // text, line
  for (int i = 0; i < final_index; ++i) {
    if (lines[i].size() > kMaxLineLength) continue;
    const std::string line = StripEmphasis(lines[i]);
    std::smatch m;
    if (std::regex_match(line, m, kStep)) {
      raw_steps.emplace_back(m[2].str(), lines[i]);
    } else if (!raw_steps.empty() && !Trim(line).empty() &&
               raw_steps.back().first.size() < kMaxLineLength) {
      raw_steps.back().first += " " + Trim(line);
    }
  }

  for (auto& [body, line] : raw_steps) {
    CoTStep step;
    std::smatch m;
    std::string text_part = body;
    if (std::regex_search(body, m, kConfidenceSuffix)) {
      text_part = m.prefix().str();
      step.confidence = ParsePercent(m[1].str(), line, &result.warnings);
    }
    text_part = Trim(text_part);
    while (!text_part.empty() &&
           (text_part.back() == ',' || text_part.back() == ';')) {
      text_part.pop_back();
      text_part = Trim(text_part);
    }
    // Template echoes such as "Step 3: ..." carry no reasoning.
    if (text_part.empty() || text_part.find_first_not_of(". ") ==
                                 std::string::npos) {
      result.warnings.push_back("empty step dropped: " + line);
      continue;
    }
    step.text = std::move(text_part);
    result.explanation.steps.push_back(std::move(step));
  }
  if (result.explanation.steps.empty()) {
    throw Error(ErrorCode::kNoSteps, "no reasoning steps found",
                lines[final_index]);
  }

  FinalAnswer fa =
      ParseFinalAnswerAt(lines, final_index, kind, &result.warnings);
  result.answer = std::move(fa.answer);
  result.confidence = fa.confidence;
  return result;
}

std::vector<std::string> ParseParaphraseList(std::string_view text) {
  std::vector<std::string> quoted;
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '"') continue;
    std::string value;
    size_t j = i + 1;
    bool closed = false;
    for (; j < text.size(); ++j) {
      const char c = text[j];
      if (c == '\\' && j + 1 < text.size()) {
        const char next = text[++j];
        value.push_back(next == 'n' || next == 't' ? ' ' : next);
      } else if (c == '"') {
        closed = true;
        break;
      } else {
        value.push_back(c);
      }
    }
    if (!closed) break;
    std::string trimmed = Trim(value);
    if (!trimmed.empty()) quoted.push_back(std::move(trimmed));
    i = j;
  }
  if (!quoted.empty()) return quoted;

  static const std::regex kNumbered(R"(^\s*\d+\s*[.)]\s*(.*?)\s*$)");
  static const std::regex kBullet(R"(^\s*[-*•]\s+(.*?)\s*$)");
  std::vector<std::string> numbered;
  std::vector<std::string> plain;
  for (const auto& raw : SplitLines(text)) {
    const std::string line = Trim(raw);
    if (line.size() > kMaxLineLength) continue;
    if (line.empty() || line == "[" || line == "]" || line == "[]") continue;
    std::smatch m;
    if (std::regex_match(line, m, kNumbered)) {
      if (!m[1].str().empty()) numbered.push_back(m[1].str());
    } else if (std::regex_match(line, m, kBullet)) {
      plain.push_back(m[1].str());
    } else {
      plain.push_back(line);
    }
  }
  std::vector<std::string> result = numbered.empty() ? plain : numbered;
  if (result.empty()) {
    throw Error(ErrorCode::kEmptyParaphraseSet, "no paraphrases found",
                std::string(text.substr(0, 200)));
  }
  return result;
}

}  // namespace nleu
