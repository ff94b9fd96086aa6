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

#include "nleu/perturbation.h"

#include <future>
#include <unordered_set>

#include "nleu/errors.h"
#include "nleu/gateway.h"
#include "nleu/parser.h"

namespace nleu {
namespace {

void CheckN(int n) {
  if (n < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "number of perturbations must be >= 1, got " +
                    std::to_string(n));
  }
}

void AddWarnings(std::vector<Diagnostic>* diagnostics, const Question& q,
                 const Provenance& provenance,
                 const std::vector<std::string>& warnings) {
  if (diagnostics == nullptr) return;
  for (const auto& w : warnings) {
    diagnostics->push_back({q.id, provenance.ToString(), "ParseWarning", w, ""});
  }
}

Diagnostic FromError(const Question& q, const Provenance& provenance,
                     const Error& e) {
  return {q.id, provenance.ToString(), std::string(ErrorCodeName(e.code())),
          e.what(), e.context()};
}

ExplanationRecord ParseInto(const Question& q, ExplanationMode mode,
                            std::string prompt, std::string response,
                            GenerationParams params, Provenance provenance,
                            std::vector<Diagnostic>* diagnostics) {
  ExplanationRecord record{.question_id = q.id,
                           .question_text = q.text,
                           .prompt_text = std::move(prompt),
                           .raw_response = std::move(response),
                           .explanation = {},
                           .answer = {},
                           .verbalized_confidence = std::nullopt,
                           .generation = std::move(params),
                           .provenance = provenance};
  if (mode == ExplanationMode::kTokenImportance) {
    auto parsed = ParseTokenImportance(record.raw_response, q.kind);
    record.explanation = std::move(parsed.explanation);
    record.answer = std::move(parsed.answer);
    record.verbalized_confidence = parsed.confidence;
    AddWarnings(diagnostics, q, provenance, parsed.warnings);
  } else {
    auto parsed = ParseCoT(record.raw_response, q.kind);
    record.explanation = std::move(parsed.explanation);
    record.answer = std::move(parsed.answer);
    record.verbalized_confidence = parsed.confidence;
    AddWarnings(diagnostics, q, provenance, parsed.warnings);
  }
  return record;
}

GenerationParams ParamsFor(const ElicitationOptions& options,
                           double temperature) {
  return {.temperature = temperature,
          .model_name = options.model_name,
          .max_tokens = options.max_tokens,
          .seed = std::nullopt};
}

}  // namespace

std::string_view ProbingStrategyName(ProbingStrategy strategy) {
  return strategy == ProbingStrategy::kSampleProbing ? "sample_probe"
                                                     : "model_probe";
}

std::optional<ProbingStrategy> ParseProbingStrategy(std::string_view name) {
  if (name == "sample_probe" || name == "sample") {
    return ProbingStrategy::kSampleProbing;
  }
  if (name == "model_probe" || name == "model") {
    return ProbingStrategy::kModelProbing;
  }
  return std::nullopt;
}

ExplanationRecord ElicitExplanation(ModelGateway& gateway, const Question& q,
                                    ExplanationMode mode,
                                    const ElicitationOptions& options,
                                    Provenance provenance, double temperature,
                                    int sample_index,
                                    std::vector<Diagnostic>* diagnostics) {
  CompletionRequest request{
      .prompt = BuildExplanationPrompt(q, mode, options.style),
      .params = ParamsFor(options, temperature),
      .sample_index = sample_index,
      .cache_bypass = false};
  std::string response = gateway.Complete(request);
  return ParseInto(q, mode, std::move(request.prompt), std::move(response),
                   std::move(request.params), provenance, diagnostics);
}

std::vector<std::string> CollectParaphrases(
    ModelGateway& gateway, const Question& q, int n,
    const ElicitationOptions& options, std::vector<Diagnostic>* diagnostics) {
  CheckN(n);
  CompletionRequest request{.prompt = BuildParaphrasePrompt(q),
                            .params = ParamsFor(options,
                                                options.base_temperature),
                            .sample_index = 0,
                            .cache_bypass = false};
  if (!options.paraphrase_model.empty()) {
    request.params.model_name = options.paraphrase_model;
  }
  std::unordered_set<std::string> seen{NormalizeToken(q.text)};
  std::vector<std::string> kept;
  bool any_parsed = false;
  for (int attempt = 0; attempt < 2 && static_cast<int>(kept.size()) < n;
       ++attempt) {
    request.sample_index = attempt;
    std::vector<std::string> candidates;
    try {
      candidates = ParseParaphraseList(gateway.Complete(request));
      any_parsed = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyParaphraseSet) throw;
      if (diagnostics != nullptr) {
        diagnostics->push_back(
            FromError(q, Provenance::Original(), e));
      }
      continue;
    }
    for (auto& c : candidates) {
      if (static_cast<int>(kept.size()) == n) break;
      if (seen.insert(NormalizeToken(c)).second) kept.push_back(std::move(c));
    }
  }
  if (!any_parsed || kept.empty()) {
    throw Error(ErrorCode::kEmptyParaphraseSet,
                "no usable paraphrases for question", q.id);
  }
  if (static_cast<int>(kept.size()) < n && diagnostics != nullptr) {
    diagnostics->push_back({q.id, "original", "FewerParaphrases",
                            "requested " + std::to_string(n) + ", got " +
                                std::to_string(kept.size()),
                            ""});
  }
  return kept;
}

ProbingSet SampleProbe(ModelGateway& gateway, const Question& q,
                       ExplanationMode mode, int n,
                       const ElicitationOptions& options,
                       ModelGateway* paraphraser) {
  CheckN(n);
  ProbingSet set;
  set.question = q;
  set.mode = mode;
  set.strategy = ProbingStrategy::kSampleProbing;
  set.requested_n = n;
  set.original =
      ElicitExplanation(gateway, q, mode, options, Provenance::Original(),
                        options.base_temperature, 0, &set.diagnostics);

  const auto paraphrases =
      CollectParaphrases(paraphraser != nullptr ? *paraphraser : gateway, q, n,
                         options, &set.diagnostics);

  struct Outcome {
    std::optional<ExplanationRecord> record;
    std::vector<Diagnostic> diagnostics;
  };
  std::vector<std::future<Outcome>> pending;
  pending.reserve(paraphrases.size());
  for (size_t i = 0; i < paraphrases.size(); ++i) {
    pending.push_back(std::async(std::launch::async, [&, i]() {
      Outcome out;
      const Provenance provenance = Provenance::Paraphrase(static_cast<int>(i) + 1);
      Question variant = q;
      variant.text = paraphrases[i];
      try {
        out.record = ElicitExplanation(gateway, variant, mode, options,
                                       provenance, options.base_temperature,
                                       0, &out.diagnostics);
        out.record->question_id = q.id;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kBudgetExceeded) throw;
        out.diagnostics.push_back(FromError(q, provenance, e));
      }
      return out;
    }));
  }
  std::vector<Outcome> outcomes;
  outcomes.reserve(pending.size());
  std::exception_ptr budget_error;
  for (auto& f : pending) {
    try {
      outcomes.push_back(f.get());
    } catch (...) {
      if (!budget_error) budget_error = std::current_exception();
    }
  }
  if (budget_error) std::rethrow_exception(budget_error);

  // Renumber so provenance indices stay contiguous after dropped parses.
  for (auto& out : outcomes) {
    for (auto& d : out.diagnostics) set.diagnostics.push_back(std::move(d));
    if (out.record) {
      out.record->provenance =
          Provenance::Paraphrase(static_cast<int>(set.perturbed.size()) + 1);
      set.perturbed.push_back(std::move(*out.record));
    }
  }
  if (set.perturbed.empty()) {
    throw Error(ErrorCode::kAllPerturbationsFailed,
                "every paraphrase explanation failed to parse", q.id);
  }
  return set;
}

ProbingSet ModelProbe(ModelGateway& gateway, const Question& q,
                      ExplanationMode mode, int n, double tau,
                      const ElicitationOptions& options) {
  CheckN(n);
  if (!(tau >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  }
  ProbingSet set;
  set.question = q;
  set.mode = mode;
  set.strategy = ProbingStrategy::kModelProbing;
  set.requested_n = n;
  set.original =
      ElicitExplanation(gateway, q, mode, options, Provenance::Original(),
                        options.base_temperature, 0, &set.diagnostics);

  CompletionRequest request{.prompt = BuildExplanationPrompt(q, mode,
                                                             options.style),
                            .params = ParamsFor(options, tau),
                            .sample_index = 0,
                            .cache_bypass = false};
  const auto responses = gateway.CompleteN(request, n);
  for (int i = 0; i < n; ++i) {
    const Provenance provenance = Provenance::TemperatureSample(i + 1);
    try {
      auto record = ParseInto(q, mode, request.prompt, responses[i],
                              request.params, provenance, &set.diagnostics);
      // Keep indices contiguous over the records that parsed.
      record.provenance = Provenance::TemperatureSample(
          static_cast<int>(set.perturbed.size()) + 1);
      set.perturbed.push_back(std::move(record));
    } catch (const Error& e) {
      set.diagnostics.push_back(FromError(q, provenance, e));
    }
  }
  if (set.perturbed.empty()) {
    throw Error(ErrorCode::kAllPerturbationsFailed,
                "every temperature sample failed to parse", q.id);
  }
  return set;
}

}  // namespace nleu
