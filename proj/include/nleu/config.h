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

// Declarative run configuration: one JSON file describing backend, dataset,
// explanation modes, strategies and scoring parameters.

#ifndef NLEU_CONFIG_H_
#define NLEU_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nleu/analysis.h"
#include "nleu/domain.h"
#include "nleu/gateway.h"
#include "nleu/serialization.h"

namespace nleu {

struct BackendConfig {
  std::string kind = "mock";        // "mock" or "http"
  std::filesystem::path fixture;    // mock only
  uint64_t seed = 0;                // mock only
  HttpBackendOptions http;          // http only
};

struct SynonymConfig {
  std::string kind = "auto";        // "auto", "wordlist" or "llm"
  std::filesystem::path path;       // wordlist only; empty means no entries
};

struct RunConfig {
  BackendConfig backend;
  std::string model_name = "mock";
  // Model asked for paraphrases; empty means `model_name`.
  std::string paraphrase_model;
  int max_tokens = 512;
  std::filesystem::path dataset_path;
  std::optional<DatasetKind> dataset_kind;  // overrides per-record kinds
  std::vector<ExplanationMode> modes = {ExplanationMode::kTokenImportance,
                                        ExplanationMode::kChainOfThought};
  std::vector<Strategy> strategies = {Strategy::kVerbalized,
                                      Strategy::kSampleProbing,
                                      Strategy::kModelProbing};
  int n_paraphrases = 10;
  int n_samples = 5;
  double tau = 1.0;
  int k = 3;
  int subset = 100;
  uint64_t seed = 0;
  std::string entailment = "auto";  // "auto" or an EntailmentBackendSpec
  SynonymConfig synonyms;
  bool faithfulness = true;
  std::optional<int64_t> budget;
  int concurrency = 4;
  std::filesystem::path output_dir = "runs";
  std::filesystem::path cache_path;  // empty means <output_dir>/cache.jsonl
};

// Relative paths resolve against `base_dir`. Unknown keys and invalid values
// throw kConfigError whose context names the field.
RunConfig ConfigFromJson(const Json& j, const std::filesystem::path& base_dir);
RunConfig LoadConfig(const std::filesystem::path& path);

// Applies "dotted.key=value" to a config document before parsing. The value is
// read as JSON when it parses, otherwise as a string.
void ApplyOverride(Json& document, const std::string& assignment);

Json ConfigToJson(const RunConfig& config);

// "auto" resolved: "llm" for http backends, "overlap:0.6" otherwise.
std::string ResolvedEntailment(const RunConfig& config);
// "auto" resolved: "llm" for http backends, "wordlist" otherwise.
std::string ResolvedSynonyms(const RunConfig& config);

// Content digest of everything that affects results: the config without
// output_dir, cache_path, budget and concurrency, plus the bytes of the
// dataset and mock fixture files.
std::string ConfigDigest(const RunConfig& config);

std::filesystem::path RunDirectory(const RunConfig& config);
std::filesystem::path CachePath(const RunConfig& config);

}  // namespace nleu

#endif  // NLEU_CONFIG_H_
