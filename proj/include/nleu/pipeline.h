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

// End-to-end run driver: load and subsample a dataset, elicit and probe
// explanations for every (question, mode, strategy), score them, optionally
// test faithfulness, and write a content-addressed run directory:
//
//   config.json         resolved configuration and its digest
//   probing/*.json      one probing set (or verbalized record) per row
//   results.jsonl       one QuestionResult per line, sorted
//   diagnostics.jsonl   recoverable problems, sorted
//   report.json         per-group aggregates
//   questions.csv       flat per-row table

#ifndef NLEU_PIPELINE_H_
#define NLEU_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "nleu/analysis.h"
#include "nleu/config.h"
#include "nleu/domain.h"
#include "nleu/gateway.h"

namespace nleu {

// JSON lines with {id, question, answer, dataset_kind}. `id` may be a string or
// an integer; an empty or missing answer means no gold answer. `kind`, when
// set, overrides per-record kinds. Throws kDatasetError with the line number.
std::vector<Question> LoadDataset(const std::filesystem::path& path,
                                  std::optional<DatasetKind> kind = std::nullopt);

// Seeded uniform sample of `size` questions without replacement, returned in
// input order. Returns all questions when `size` is not smaller.
std::vector<Question> SampleSubset(const std::vector<Question>& questions,
                                   int size, uint64_t seed);

std::shared_ptr<CompletionBackend> MakeBackend(const RunConfig& config);

enum class RunStatus { kOk, kBackendErrors, kBudgetExceeded };

struct RunOutcome {
  RunStatus status = RunStatus::kOk;
  std::filesystem::path run_dir;
  size_t results = 0;
  size_t failed_rows = 0;
  GatewayStats stats;
};

// Exit code for the CLI: 0, 2 (some rows failed on backend errors) or 3
// (budget exhausted; partial results written).
int ExitCode(RunStatus status);

// `backend` replaces the configured backend when given.
RunOutcome RunPipeline(const RunConfig& config,
                       std::shared_ptr<CompletionBackend> backend = nullptr);

// Reads results.jsonl from `run_dir`, rewrites report.json and questions.csv,
// and returns the report.
RunReport ReportRun(const std::filesystem::path& run_dir);

// Safe file stem for a question id: unchanged when it only uses
// [A-Za-z0-9._-], otherwise sanitized and suffixed with a digest.
std::string FileStem(const std::string& question_id);

}  // namespace nleu

#endif  // NLEU_PIPELINE_H_
