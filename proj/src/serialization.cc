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

#include "nleu/serialization.h"

#include <cmath>

#include "nleu/errors.h"

namespace nleu {
namespace {

[[noreturn]] void Fail(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kFormatError, why, field);
}

const Json& Field(const Json& j, const char* name) {
  if (!j.is_object()) Fail(name, "expected an object");
  auto it = j.find(name);
  if (it == j.end()) Fail(name, "missing field");
  return *it;
}

std::string String(const Json& j, const char* name) {
  const Json& v = Field(j, name);
  if (!v.is_string()) Fail(name, "expected a string");
  return v.get<std::string>();
}

double Number(const Json& j, const char* name) {
  const Json& v = Field(j, name);
  if (!v.is_number()) Fail(name, "expected a number");
  return v.get<double>();
}

int Integer(const Json& j, const char* name) {
  const Json& v = Field(j, name);
  if (!v.is_number_integer()) Fail(name, "expected an integer");
  return v.get<int>();
}

const Json& Array(const Json& j, const char* name) {
  const Json& v = Field(j, name);
  if (!v.is_array()) Fail(name, "expected an array");
  return v;
}

bool IsAbsent(const Json& j, const char* name) {
  auto it = j.find(name);
  return it == j.end() || it->is_null();
}

ConfidenceScore Confidence(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) Fail(name, "confidence outside [0, 1]");
  return ConfidenceScore(value);
}

Json OptionalConfidence(const std::optional<ConfidenceScore>& c) {
  return c ? Json(c->value()) : Json(nullptr);
}

std::optional<ConfidenceScore> OptionalConfidenceFrom(const Json& j,
                                                      const char* name) {
  if (IsAbsent(j, name)) return std::nullopt;
  return Confidence(Number(j, name), name);
}

DatasetKind KindFrom(const Json& j, const char* name) {
  auto kind = ParseDatasetKind(String(j, name));
  if (!kind) Fail(name, "unknown dataset kind");
  return *kind;
}

ExplanationMode ModeFrom(const Json& j, const char* name) {
  auto mode = ParseExplanationMode(String(j, name));
  if (!mode) Fail(name, "unknown explanation mode");
  return *mode;
}

Provenance ProvenanceFrom(const std::string& text) {
  if (text == "original") return Provenance::Original();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    const std::string tail = text.substr(colon + 1);
    if (!tail.empty() && tail.find_first_not_of("0123456789") ==
                             std::string::npos && tail.size() < 9) {
      const int index = std::stoi(tail);
      if (head == "paraphrase") return Provenance::Paraphrase(index);
      if (head == "sample") return Provenance::TemperatureSample(index);
    }
  }
  Fail("provenance", "unrecognized provenance '" + text + "'");
}

}  // namespace

Json AnswerToJson(const Answer& answer) {
  return {{"kind", DatasetKindName(AnswerKind(answer))},
          {"value", AnswerToString(answer)}};
}

Answer AnswerFromJson(const Json& j) {
  const DatasetKind kind = KindFrom(j, "kind");
  auto answer = ParseAnswer(String(j, "value"), kind);
  if (!answer) Fail("value", "answer does not parse for its kind");
  return *answer;
}

Json QuestionToJson(const Question& q) {
  return {{"id", q.id},
          {"text", q.text},
          {"dataset_kind", DatasetKindName(q.kind)},
          {"gold_answer",
           q.gold_answer ? AnswerToJson(*q.gold_answer) : Json(nullptr)}};
}

Question QuestionFromJson(const Json& j) {
  Question q{.id = String(j, "id"),
             .text = String(j, "text"),
             .kind = KindFrom(j, "dataset_kind"),
             .gold_answer = std::nullopt};
  if (!IsAbsent(j, "gold_answer")) {
    q.gold_answer = AnswerFromJson(Field(j, "gold_answer"));
  }
  return q;
}

Json ExplanationToJson(const Explanation& explanation) {
  if (const auto* ti = std::get_if<TokenImportanceExplanation>(&explanation)) {
    Json entries = Json::array();
    for (const auto& e : ti->entries()) {
      entries.push_back({{"token", e.token}, {"weight", e.weight}});
    }
    return {{"mode", "ti"}, {"entries", std::move(entries)}};
  }
  const auto& cot = std::get<CoTExplanation>(explanation);
  Json steps = Json::array();
  for (const auto& s : cot.steps) {
    steps.push_back(
        {{"text", s.text}, {"confidence", OptionalConfidence(s.confidence)}});
  }
  return {{"mode", "cot"}, {"steps", std::move(steps)}};
}

Explanation ExplanationFromJson(const Json& j) {
  if (ModeFrom(j, "mode") == ExplanationMode::kTokenImportance) {
    std::vector<TokenWeight> entries;
    for (const auto& e : Array(j, "entries")) {
      const double w = Number(e, "weight");
      if (!std::isfinite(w) || w < 0.0) Fail("weight", "negative weight");
      entries.push_back({String(e, "token"), w});
    }
    return TokenImportanceExplanation(std::move(entries));
  }
  CoTExplanation cot;
  for (const auto& s : Array(j, "steps")) {
    cot.steps.push_back(
        {String(s, "text"), OptionalConfidenceFrom(s, "confidence")});
  }
  return cot;
}

Json RecordToJson(const ExplanationRecord& r) {
  Json generation = {{"temperature", r.generation.temperature},
                     {"model_name", r.generation.model_name},
                     {"max_tokens", r.generation.max_tokens}};
  if (r.generation.seed) generation["seed"] = *r.generation.seed;
  return {{"question_id", r.question_id},
          {"question_text", r.question_text},
          {"provenance", r.provenance.ToString()},
          {"prompt", r.prompt_text},
          {"response", r.raw_response},
          {"explanation", ExplanationToJson(r.explanation)},
          {"answer", AnswerToJson(r.answer)},
          {"verbalized_confidence", OptionalConfidence(r.verbalized_confidence)},
          {"generation", std::move(generation)}};
}

ExplanationRecord RecordFromJson(const Json& j) {
  const Json& g = Field(j, "generation");
  GenerationParams generation{.temperature = Number(g, "temperature"),
                              .model_name = String(g, "model_name"),
                              .max_tokens = Integer(g, "max_tokens"),
                              .seed = std::nullopt};
  if (!IsAbsent(g, "seed")) {
    const Json& seed = Field(g, "seed");
    if (!seed.is_number_integer()) Fail("seed", "expected an integer");
    generation.seed = seed.get<int64_t>();
  }
  return {.question_id = String(j, "question_id"),
          .question_text = String(j, "question_text"),
          .prompt_text = String(j, "prompt"),
          .raw_response = String(j, "response"),
          .explanation = ExplanationFromJson(Field(j, "explanation")),
          .answer = AnswerFromJson(Field(j, "answer")),
          .verbalized_confidence =
              OptionalConfidenceFrom(j, "verbalized_confidence"),
          .generation = std::move(generation),
          .provenance = ProvenanceFrom(String(j, "provenance"))};
}

Json DiagnosticToJson(const Diagnostic& d) {
  return {{"question_id", d.question_id},
          {"provenance", d.provenance},
          {"code", d.code},
          {"message", d.message},
          {"line", d.line}};
}

Diagnostic DiagnosticFromJson(const Json& j) {
  return {String(j, "question_id"), String(j, "provenance"), String(j, "code"),
          String(j, "message"), String(j, "line")};
}

Json ProbingSetToJson(const ProbingSet& set) {
  Json perturbed = Json::array();
  for (const auto& r : set.perturbed) perturbed.push_back(RecordToJson(r));
  Json diagnostics = Json::array();
  for (const auto& d : set.diagnostics) diagnostics.push_back(DiagnosticToJson(d));
  return {{"question", QuestionToJson(set.question)},
          {"mode", ExplanationModeName(set.mode)},
          {"strategy", ProbingStrategyName(set.strategy)},
          {"requested_n", set.requested_n},
          {"n_effective", set.n_effective()},
          {"original", RecordToJson(set.original)},
          {"perturbed", std::move(perturbed)},
          {"diagnostics", std::move(diagnostics)}};
}

ProbingSet ProbingSetFromJson(const Json& j) {
  ProbingSet set;
  set.question = QuestionFromJson(Field(j, "question"));
  set.mode = ModeFrom(j, "mode");
  auto strategy = ParseProbingStrategy(String(j, "strategy"));
  if (!strategy) Fail("strategy", "unknown probing strategy");
  set.strategy = *strategy;
  set.requested_n = Integer(j, "requested_n");
  set.original = RecordFromJson(Field(j, "original"));
  for (const auto& r : Array(j, "perturbed")) {
    set.perturbed.push_back(RecordFromJson(r));
  }
  if (!IsAbsent(j, "diagnostics")) {
    for (const auto& d : Array(j, "diagnostics")) {
      set.diagnostics.push_back(DiagnosticFromJson(d));
    }
  }
  if (ExplanationModeOf(set.original.explanation) != set.mode) {
    Fail("original", "explanation mode differs from the set mode");
  }
  for (const auto& r : set.perturbed) {
    if (ExplanationModeOf(r.explanation) != set.mode) {
      Fail("perturbed", "explanation mode differs from the set mode");
    }
  }
  return set;
}

Json ResultToJson(const QuestionResult& r) {
  Json diagnostics = Json::array();
  for (const auto& d : r.diagnostics) diagnostics.push_back(DiagnosticToJson(d));
  return {{"question_id", r.question_id},
          {"dataset_kind", DatasetKindName(r.dataset_kind)},
          {"mode", ExplanationModeName(r.mode)},
          {"strategy", StrategyName(r.strategy)},
          {"confidence", r.probing_confidence.value()},
          {"verbalized_confidence", OptionalConfidence(r.verbalized_confidence)},
          {"faithfulness", r.faithfulness ? Json(*r.faithfulness) : Json(nullptr)},
          {"correct", r.correct ? Json(*r.correct) : Json(nullptr)},
          {"n_effective", r.n_effective},
          {"diagnostics", std::move(diagnostics)}};
}

QuestionResult ResultFromJson(const Json& j) {
  QuestionResult r;
  r.question_id = String(j, "question_id");
  r.dataset_kind = KindFrom(j, "dataset_kind");
  r.mode = ModeFrom(j, "mode");
  auto strategy = ParseStrategy(String(j, "strategy"));
  if (!strategy) Fail("strategy", "unknown strategy");
  r.strategy = *strategy;
  r.probing_confidence = Confidence(Number(j, "confidence"), "confidence");
  r.verbalized_confidence = OptionalConfidenceFrom(j, "verbalized_confidence");
  if (!IsAbsent(j, "faithfulness")) {
    r.faithfulness = Number(j, "faithfulness");
  }
  if (!IsAbsent(j, "correct")) {
    const Json& c = Field(j, "correct");
    if (!c.is_boolean()) Fail("correct", "expected a boolean");
    r.correct = c.get<bool>();
  }
  r.n_effective = Integer(j, "n_effective");
  if (!IsAbsent(j, "diagnostics")) {
    for (const auto& d : Array(j, "diagnostics")) {
      r.diagnostics.push_back(DiagnosticFromJson(d));
    }
  }
  return r;
}

Json ParseJsonText(const std::string& text, const std::string& context) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kFormatError, "invalid JSON", context);
  }
  return j;
}

}  // namespace nleu
