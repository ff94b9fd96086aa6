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

#include "nleu/faithfulness.h"

#include <cctype>
#include <fstream>
#include <future>
#include <span>

#include "json.hpp"
#include "nleu/agreement.h"
#include "nleu/errors.h"
#include "nleu/gateway.h"
#include "nleu/parser.h"
#include "nleu/prompting.h"

namespace nleu {
namespace {

bool IsPunct(char c) { return std::ispunct(static_cast<unsigned char>(c)); }

struct RawWord {
  size_t begin;  // byte offsets into the text
  size_t end;
  std::string normalized;
};

std::vector<RawWord> SplitWords(const std::string& text) {
  std::vector<RawWord> words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) {
      ++j;
    }
    if (j > i) {
      words.push_back({i, j, NormalizeToken(std::string_view(text).substr(i, j - i))});
    }
    i = j;
  }
  return words;
}

// Start indices (into `words`) of every window matching `target`.
std::vector<size_t> FindTarget(const std::vector<RawWord>& words,
                               const std::vector<std::string>& target) {
  std::vector<size_t> hits;
  if (target.empty() || target.size() > words.size()) return hits;
  for (size_t s = 0; s + target.size() <= words.size(); ++s) {
    bool match = true;
    for (size_t t = 0; t < target.size() && match; ++t) {
      match = words[s + t].normalized == target[t];
    }
    if (match) hits.push_back(s);
  }
  return hits;
}

bool Contains(const std::string& text, const std::string& target) {
  return !FindTarget(SplitWords(text), NormalizedWords(target)).empty();
}

std::string ReplaceTarget(const std::string& text,
                          const std::vector<std::string>& target,
                          const std::string& replacement) {
  const auto words = SplitWords(text);
  const auto hits = FindTarget(words, target);
  std::string out;
  size_t cursor = 0;
  size_t skip_until = 0;
  for (size_t s : hits) {
    if (s < skip_until) continue;  // overlapping window
    const RawWord& first = words[s];
    const RawWord& last = words[s + target.size() - 1];
    size_t core_begin = first.begin;
    while (core_begin < first.end && IsPunct(text[core_begin])) ++core_begin;
    size_t core_end = last.end;
    while (core_end > last.begin && IsPunct(text[core_end - 1])) --core_end;
    out.append(text, cursor, core_begin - cursor);
    out += replacement;
    cursor = core_end;
    skip_until = s + target.size();
  }
  out.append(text, cursor, std::string::npos);
  return out;
}

}  // namespace

WordlistSynonyms::WordlistSynonyms(std::map<std::string, std::string> table) {
  for (auto& [word, synonym] : table) {
    table_[NormalizeToken(word)] = std::move(synonym);
  }
}

WordlistSynonyms WordlistSynonyms::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kConfigError, "cannot read synonym wordlist",
                path.string());
  }
  const auto parsed = nlohmann::json::parse(in, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw Error(ErrorCode::kFormatError,
                "synonym wordlist must be a JSON object", path.string());
  }
  std::map<std::string, std::string> table;
  for (const auto& [word, synonym] : parsed.items()) {
    if (!synonym.is_string()) {
      throw Error(ErrorCode::kFormatError, "synonyms must be strings", word);
    }
    table[word] = synonym.get<std::string>();
  }
  return WordlistSynonyms(std::move(table));
}

std::optional<std::string> WordlistSynonyms::Synonym(const std::string& word,
                                                     const std::string&) {
  auto it = table_.find(NormalizeToken(word));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

LlmSynonyms::LlmSynonyms(ModelGateway& gateway, std::string model_name)
    : gateway_(gateway), model_name_(std::move(model_name)) {}

std::optional<std::string> LlmSynonyms::Synonym(const std::string& word,
                                                const std::string& question) {
  CompletionRequest request;
  request.prompt = BuildSynonymPrompt(word, question);
  request.params.model_name = model_name_;
  request.params.temperature = 0.0;
  request.params.max_tokens = 16;
  const std::string response = gateway_.Complete(request);
  const std::string first_line = response.substr(0, response.find('\n'));
  std::string synonym = NormalizeToken(first_line);
  if (synonym.empty() || synonym == NormalizeToken(word)) return std::nullopt;
  return synonym;
}

Substitution SynonymSubstitute(const Question& q,
                               const std::vector<std::string>& targets,
                               SynonymProvider& provider) {
  for (const auto& target : targets) {
    if (!Contains(q.text, target)) {
      throw Error(ErrorCode::kTargetNotFound,
                  "target word does not occur in the question", target);
    }
  }
  Substitution result{q.text, {}, {}};
  for (const auto& target : targets) {
    const std::string normalized = NormalizeToken(target);
    auto synonym = provider.Synonym(normalized, q.text);
    if (!synonym || NormalizeToken(*synonym).empty()) {
      result.skipped.push_back(normalized);
      continue;
    }
    result.text =
        ReplaceTarget(result.text, NormalizedWords(target), *synonym);
    result.replacements.emplace_back(normalized, *synonym);
  }
  return result;
}

CounterfactualResult TokenImportanceCounterfactual(
    ModelGateway& gateway, const Question& q,
    const TokenImportanceExplanation& ti, int k, SynonymProvider& provider,
    const ElicitationOptions& options) {
  if (k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  }
  CounterfactualResult result;
  std::vector<std::string> targets;
  for (const auto& token : ti.TopTokens(k)) {
    if (Contains(q.text, token)) {
      targets.push_back(token);
    } else {
      result.not_found.push_back(token);
    }
  }
  const Substitution sub = SynonymSubstitute(q, targets, provider);
  result.substituted_question = sub.text;
  result.replacements = sub.replacements;
  result.skipped = sub.skipped;

  std::vector<TokenWeight> expected = ti.entries();
  for (auto& entry : expected) {
    for (const auto& [from, to] : sub.replacements) {
      if (entry.token == from) entry.token = to;
    }
  }
  result.expected = TokenImportanceExplanation(std::move(expected));

  Question edited = q;
  edited.text = sub.text;
  const ExplanationRecord fresh = ElicitExplanation(
      gateway, edited, ExplanationMode::kTokenImportance, options,
      Provenance::Original(), options.base_temperature, 0);
  result.observed = std::get<TokenImportanceExplanation>(fresh.explanation);
  result.score = TokenRankAgreement(result.observed, result.expected, k);
  return result;
}

EarlyAnsweringResult CoTEarlyAnswering(ModelGateway& gateway,
                                       const Question& q,
                                       const CoTExplanation& cot,
                                       const Answer& full_answer,
                                       const ElicitationOptions& options) {
  const size_t n = cot.steps.size();
  if (n == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "early answering needs at least one step", q.id);
  }
  std::vector<std::future<std::string>> pending;
  pending.reserve(n);
  for (size_t t = 1; t <= n; ++t) {
    CompletionRequest request;
    request.prompt = BuildEarlyAnswerPrompt(
        q, std::span<const CoTStep>(cot.steps.data(), t));
    request.params.model_name = options.model_name;
    request.params.max_tokens = options.max_tokens;
    request.params.temperature = options.base_temperature;
    pending.push_back(std::async(std::launch::async,
                                 [&gateway, request = std::move(request)] {
                                   return gateway.Complete(request);
                                 }));
  }
  std::vector<std::string> responses;
  responses.reserve(n);
  std::exception_ptr first_error;
  for (auto& f : pending) {
    try {
      responses.push_back(f.get());
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  EarlyAnsweringResult result;
  size_t matching = 0;
  for (size_t t = 0; t < n; ++t) {
    const std::string provenance = "prefix:" + std::to_string(t + 1);
    try {
      const FinalAnswer fa = ParseFinalAnswer(responses[t], q.kind);
      result.prefix_answers.push_back(fa.answer);
      if (AnswersEqual(fa.answer, full_answer)) ++matching;
    } catch (const Error& e) {
      result.prefix_answers.push_back(std::nullopt);
      result.diagnostics.push_back({q.id, provenance,
                                    std::string(ErrorCodeName(e.code())),
                                    e.what(), e.context()});
    }
  }
  result.matching_fraction =
      static_cast<double>(matching) / static_cast<double>(n);
  return result;
}

}  // namespace nleu
