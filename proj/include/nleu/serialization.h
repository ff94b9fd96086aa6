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

// JSON encodings of the domain, probing and result types. Every FromJson
// throws kFormatError with the offending field on malformed input.

#ifndef NLEU_SERIALIZATION_H_
#define NLEU_SERIALIZATION_H_

#include "json.hpp"
#include "nleu/analysis.h"
#include "nleu/domain.h"
#include "nleu/perturbation.h"

namespace nleu {

using Json = nlohmann::ordered_json;

Json AnswerToJson(const Answer& answer);
Answer AnswerFromJson(const Json& j);

Json QuestionToJson(const Question& q);
Question QuestionFromJson(const Json& j);

Json ExplanationToJson(const Explanation& explanation);
Explanation ExplanationFromJson(const Json& j);

Json RecordToJson(const ExplanationRecord& record);
ExplanationRecord RecordFromJson(const Json& j);

Json DiagnosticToJson(const Diagnostic& d);
Diagnostic DiagnosticFromJson(const Json& j);

Json ProbingSetToJson(const ProbingSet& set);
ProbingSet ProbingSetFromJson(const Json& j);

Json ResultToJson(const QuestionResult& result);
QuestionResult ResultFromJson(const Json& j);

// Parses `text` as JSON, mapping syntax errors to kFormatError.
Json ParseJsonText(const std::string& text, const std::string& context);

}  // namespace nleu

#endif  // NLEU_SERIALIZATION_H_
