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

#include "nleu/pipeline.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "nleu/agreement.h"
#include "nleu/digest.h"
#include "nleu/errors.h"
#include "nleu/faithfulness.h"
#include "nleu/perturbation.h"
#include "nleu/serialization.h"

namespace nleu {
namespace {

namespace fs = std::filesystem;

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kConfigError, "cannot write output file",
                path.string());
  }
  out << content;
}

std::string ReadFile(const fs::path& path, ErrorCode code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(code, "cannot read file", path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool IsBackendFailure(ErrorCode code) {
  return code == ErrorCode::kNetworkError || code == ErrorCode::kBackendError;
}

Diagnostic FromError(const std::string& question_id, const std::string& where,
                     const Error& e) {
  return {question_id, where, std::string(ErrorCodeName(e.code())), e.what(),
          e.context()};
}

// Everything produced for one (question, mode, strategy).
struct Row {
  std::string question_id;
  ExplanationMode mode;
  Strategy strategy;
  std::optional<QuestionResult> result;
  std::vector<Diagnostic> diagnostics;  // only used when `result` is empty
  bool backend_failure = false;

  auto Key() const { return std::tuple(question_id, mode, strategy); }
};

struct FaithfulnessOutcome {
  std::optional<double> score;
  Json detail;
  std::vector<Diagnostic> diagnostics;
  bool backend_failure = false;
};

class Runner {
 public:
  Runner(const RunConfig& config, ModelGateway& gateway, Entailer& entailer,
         SynonymProvider& synonyms, fs::path run_dir)
      : config_(config),
        gateway_(gateway),
        entailer_(entailer),
        synonyms_(synonyms),
        run_dir_(std::move(run_dir)),
        entailment_(ResolvedEntailment(config)) {}

  // Returns false when the budget ran out.
  bool ProcessQuestion(const Question& q, std::vector<Row>* rows) {
    std::map<std::pair<ExplanationMode, PromptStyle>, FaithfulnessOutcome>
        faithfulness;
    for (ExplanationMode mode : config_.modes) {
      for (Strategy strategy : config_.strategies) {
        Row row{q.id, mode, strategy, std::nullopt, {}, false};
        try {
          Json artifact = ProcessRow(q, mode, strategy, &faithfulness, &row);
          WriteFile(run_dir_ / "probing" /
                        (FileStem(q.id) + "__" +
                         std::string(ExplanationModeName(mode)) + "__" +
                         std::string(StrategyName(strategy)) + ".json"),
                    artifact.dump(2) + "\n");
        } catch (const Error& e) {
          if (e.code() == ErrorCode::kBudgetExceeded) return false;
          row.result.reset();
          row.diagnostics.push_back(FromError(q.id, "original", e));
          row.backend_failure = row.backend_failure || IsBackendFailure(e.code());
        }
        rows->push_back(std::move(row));
      }
    }
    return true;
  }

 private:
  ElicitationOptions Options(PromptStyle style) const {
    return {.model_name = config_.model_name,
            .paraphrase_model = config_.paraphrase_model,
            .max_tokens = config_.max_tokens,
            .style = style,
            .base_temperature = 0.0};
  }

  Json ProcessRow(
      const Question& q, ExplanationMode mode, Strategy strategy,
      std::map<std::pair<ExplanationMode, PromptStyle>, FaithfulnessOutcome>*
          memo,
      Row* row) {
    const PromptStyle style = strategy == Strategy::kVerbalized
                                  ? PromptStyle::kVerbalized
                                  : PromptStyle::kProbing;
    const ElicitationOptions options = Options(style);
    QuestionResult result;
    result.question_id = q.id;
    result.dataset_kind = q.kind;
    result.mode = mode;
    result.strategy = strategy;

    Json artifact;
    ExplanationRecord original;
    Json scores = {{"k", config_.k}};
    if (strategy == Strategy::kVerbalized) {
      original = ElicitExplanation(gateway_, q, mode, options,
                                   Provenance::Original(), 0.0, 0,
                                   &result.diagnostics);
      if (!original.verbalized_confidence) {
        throw Error(ErrorCode::kMissingFinalAnswer,
                    "response states no overall confidence", q.id);
      }
      result.probing_confidence = *original.verbalized_confidence;
      result.n_effective = 0;
      artifact = {{"question", QuestionToJson(q)},
                  {"mode", ExplanationModeName(mode)},
                  {"strategy", StrategyName(strategy)},
                  {"original", RecordToJson(original)}};
    } else {
      ProbingSet set =
          strategy == Strategy::kSampleProbing
              ? SampleProbe(gateway_, q, mode, config_.n_paraphrases, options)
              : ModelProbe(gateway_, q, mode, config_.n_samples, config_.tau,
                           options);
      result.probing_confidence =
          mode == ExplanationMode::kTokenImportance
              ? TokenImportanceUncertainty(set, config_.k)
              : CoTUncertainty(set, entailer_);
      result.n_effective = set.n_effective();
      result.diagnostics = set.diagnostics;
      original = set.original;
      artifact = ProbingSetToJson(set);
      if (mode == ExplanationMode::kChainOfThought) {
        scores["entailment"] = entailment_;
      }
    }
    result.verbalized_confidence = original.verbalized_confidence;
    if (q.gold_answer) {
      result.correct = AnswersEqual(original.answer, *q.gold_answer);
    }

    if (config_.faithfulness) {
      const auto key = std::pair(mode, style);
      auto it = memo->find(key);
      if (it == memo->end()) {
        it = memo->emplace(key, Faithfulness(q, mode, original, options)).first;
      }
      result.faithfulness = it->second.score;
      for (const auto& d : it->second.diagnostics) {
        result.diagnostics.push_back(d);
      }
      row->backend_failure = it->second.backend_failure;
      scores["faithfulness"] =
          result.faithfulness ? Json(*result.faithfulness) : Json(nullptr);
      scores["faithfulness_detail"] = it->second.detail;
    }
    scores["confidence"] = result.probing_confidence.value();
    artifact["scores"] = std::move(scores);
    row->result = std::move(result);
    return artifact;
  }

  FaithfulnessOutcome Faithfulness(const Question& q, ExplanationMode mode,
                                   const ExplanationRecord& original,
                                   const ElicitationOptions& options) {
    FaithfulnessOutcome out;
    const std::string where = "faithfulness";
    try {
      if (mode == ExplanationMode::kTokenImportance) {
        const auto& ti =
            std::get<TokenImportanceExplanation>(original.explanation);
        const CounterfactualResult cf = TokenImportanceCounterfactual(
            gateway_, q, ti, config_.k, synonyms_, options);
        Json replacements = Json::object();
        for (const auto& [from, to] : cf.replacements) replacements[from] = to;
        out.detail = {{"test", "counterfactual"},
                      {"substituted_question", cf.substituted_question},
                      {"replacements", replacements},
                      {"skipped", cf.skipped},
                      {"not_found", cf.not_found}};
        if (cf.replacements.empty()) {
          out.diagnostics.push_back({q.id, where, "NoIntervention",
                                     "no important token could be replaced",
                                     ""});
        } else {
          out.score = cf.score;
        }
      } else {
        const auto& cot = std::get<CoTExplanation>(original.explanation);
        const EarlyAnsweringResult ea =
            CoTEarlyAnswering(gateway_, q, cot, original.answer, options);
        Json answers = Json::array();
        for (const auto& a : ea.prefix_answers) {
          answers.push_back(a ? Json(AnswerToString(*a)) : Json(nullptr));
        }
        out.detail = {{"test", "early_answering"},
                      {"prefix_answers", std::move(answers)}};
        out.diagnostics = ea.diagnostics;
        out.score = ea.matching_fraction;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kBudgetExceeded) throw;
      out.score.reset();
      out.detail = nullptr;
      out.diagnostics.push_back(FromError(q.id, where, e));
      out.backend_failure = IsBackendFailure(e.code());
    }
    return out;
  }

  const RunConfig& config_;
  ModelGateway& gateway_;
  Entailer& entailer_;
  SynonymProvider& synonyms_;
  fs::path run_dir_;
  std::string entailment_;
};

std::string ResultsJsonl(const std::vector<QuestionResult>& results) {
  std::string out;
  for (const auto& r : results) out += ResultToJson(r).dump() + "\n";
  return out;
}

void WriteReport(const fs::path& run_dir,
                 const std::vector<QuestionResult>& results) {
  if (results.empty()) {
    WriteFile(run_dir / "report.json",
              "{\n  \"diagnostics\": 0,\n  \"groups\": [],\n"
              "  \"total_results\": 0\n}\n");
  } else {
    WriteFile(run_dir / "report.json", ReportToJson(SummarizeRun(results)));
  }
  WriteFile(run_dir / "questions.csv", ResultsToCsv(results));
}

std::unique_ptr<SynonymProvider> MakeSynonyms(const RunConfig& config,
                                              ModelGateway& gateway) {
  if (ResolvedSynonyms(config) == "llm") {
    return std::make_unique<LlmSynonyms>(gateway, config.model_name);
  }
  if (config.synonyms.path.empty()) {
    return std::make_unique<WordlistSynonyms>(
        std::map<std::string, std::string>{});
  }
  return std::make_unique<WordlistSynonyms>(
      WordlistSynonyms::FromFile(config.synonyms.path));
}

}  // namespace

std::vector<Question> LoadDataset(const fs::path& path,
                                  std::optional<DatasetKind> kind) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kDatasetError, "cannot read dataset", path.string());
  }
  std::vector<Question> questions;
  std::set<std::string> ids;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = path.filename().string() + ":" +
                              std::to_string(number);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::kDatasetError, "line is not a JSON object", where);
    }
    Question q;
    auto id = j.find("id");
    if (id == j.end() || !(id->is_string() || id->is_number_integer())) {
      throw Error(ErrorCode::kDatasetError, "missing or invalid id", where);
    }
    q.id = id->is_string() ? id->get<std::string>() : id->dump();
    if (q.id.empty() || !ids.insert(q.id).second) {
      throw Error(ErrorCode::kDatasetError, "empty or duplicate id", where);
    }
    auto text = j.find("question");
    if (text == j.end() || !text->is_string() ||
        text->get<std::string>().empty()) {
      throw Error(ErrorCode::kDatasetError, "missing question text", where);
    }
    q.text = text->get<std::string>();
    if (kind) {
      q.kind = *kind;
    } else {
      auto k = j.find("dataset_kind");
      std::optional<DatasetKind> parsed;
      if (k != j.end() && k->is_string()) {
        parsed = ParseDatasetKind(k->get<std::string>());
      }
      if (!parsed) {
        throw Error(ErrorCode::kDatasetError, "missing or unknown dataset_kind",
                    where);
      }
      q.kind = *parsed;
    }
    auto answer = j.find("answer");
    if (answer != j.end() && !answer->is_null()) {
      std::string raw;
      if (answer->is_string()) {
        raw = answer->get<std::string>();
      } else if (answer->is_number() || answer->is_boolean()) {
        raw = answer->is_boolean() ? (answer->get<bool>() ? "yes" : "no")
                                   : answer->dump();
      } else {
        throw Error(ErrorCode::kDatasetError, "answer must be a string", where);
      }
      if (!raw.empty()) {
        q.gold_answer = ParseAnswer(raw, q.kind);
        if (!q.gold_answer) {
          throw Error(ErrorCode::kDatasetError,
                      "answer does not parse for the dataset kind", where);
        }
      }
    }
    questions.push_back(std::move(q));
  }
  return questions;
}

std::vector<Question> SampleSubset(const std::vector<Question>& questions,
                                   int size, uint64_t seed) {
  if (size < 0) {
    throw Error(ErrorCode::kInvalidArgument, "subset size must be >= 0");
  }
  const size_t n = questions.size();
  if (static_cast<size_t>(size) >= n) return questions;
  // Explicit rejection sampling keeps the draw identical across standard
  // libraries.
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](uint64_t bound) {
    const uint64_t limit = std::numeric_limits<uint64_t>::max() -
                           std::numeric_limits<uint64_t>::max() % bound;
    uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    return r % bound;
  };
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  for (size_t i = 0; i < static_cast<size_t>(size); ++i) {
    std::swap(order[i], order[i + uniform(n - i)]);
  }
  order.resize(size);
  std::sort(order.begin(), order.end());
  std::vector<Question> chosen;
  chosen.reserve(order.size());
  for (size_t i : order) chosen.push_back(questions[i]);
  return chosen;
}

std::shared_ptr<CompletionBackend> MakeBackend(const RunConfig& config) {
  if (config.backend.kind == "http") {
    return std::make_shared<HttpBackend>(config.backend.http);
  }
  return ScriptedBackend::FromFile(config.backend.fixture, config.backend.seed);
}

int ExitCode(RunStatus status) {
  switch (status) {
    case RunStatus::kOk:
      return 0;
    case RunStatus::kBackendErrors:
      return 2;
    case RunStatus::kBudgetExceeded:
      return 3;
  }
  return 1;
}

std::string FileStem(const std::string& question_id) {
  std::string stem;
  bool changed = question_id.empty();
  for (char c : question_id) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' ||
        c == '-') {
      stem += c;
    } else {
      stem += '_';
      changed = true;
    }
  }
  if (stem.size() > 80) {
    stem.resize(80);
    changed = true;
  }
  if (changed) stem += "-" + Sha256Hex(question_id).substr(0, 8);
  return stem;
}

RunOutcome RunPipeline(const RunConfig& config,
                       std::shared_ptr<CompletionBackend> backend) {
  const std::vector<Question> questions = SampleSubset(
      LoadDataset(config.dataset_path, config.dataset_kind), config.subset,
      config.seed);
  if (!backend) backend = MakeBackend(config);

  RunOutcome outcome;
  outcome.run_dir = RunDirectory(config);
  const fs::path cache_path = CachePath(config);
  if (cache_path.has_parent_path()) {
    fs::create_directories(cache_path.parent_path());
  }
  fs::remove_all(outcome.run_dir / "probing");
  fs::create_directories(outcome.run_dir / "probing");

  Json config_json = ConfigToJson(config);
  config_json["entailment"] = ResolvedEntailment(config);
  config_json["synonyms"]["kind"] = ResolvedSynonyms(config);
  config_json["digest"] = ConfigDigest(config);
  Json ids = Json::array();
  for (const auto& q : questions) ids.push_back(q.id);
  config_json["question_ids"] = std::move(ids);
  WriteFile(outcome.run_dir / "config.json", config_json.dump(2) + "\n");

  auto cache = std::make_shared<ResponseCache>(cache_path);
  ModelGateway gateway(backend, cache,
                       {.max_concurrency = config.concurrency,
                        .budget = config.budget});
  EntailmentBackendSpec spec =
      EntailmentBackendSpec::Parse(ResolvedEntailment(config));
  if (spec.model_name.empty()) spec.model_name = config.model_name;
  std::unique_ptr<Entailer> entailer = MakeEntailer(spec, &gateway);
  std::unique_ptr<SynonymProvider> synonyms = MakeSynonyms(config, gateway);
  Runner runner(config, gateway, *entailer, *synonyms, outcome.run_dir);

  // Results are appended as they complete and rewritten sorted at the end.
  std::ofstream partial(outcome.run_dir / "results.jsonl",
                        std::ios::binary | std::ios::trunc);
  std::mutex mutex;
  std::vector<Row> rows;
  std::atomic<size_t> next{0};
  std::atomic<bool> budget_exceeded{false};
  std::exception_ptr fatal;

  auto worker = [&] {
    while (!budget_exceeded.load()) {
      const size_t i = next.fetch_add(1);
      if (i >= questions.size()) return;
      std::vector<Row> local;
      bool ok = true;
      try {
        ok = runner.ProcessQuestion(questions[i], &local);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!fatal) fatal = std::current_exception();
        budget_exceeded = true;  // stop the other workers
        return;
      }
      std::lock_guard lock(mutex);
      for (auto& row : local) {
        if (row.result) {
          partial << ResultToJson(*row.result).dump() << "\n";
        }
        rows.push_back(std::move(row));
      }
      partial.flush();
      if (!ok) budget_exceeded = true;
    }
  };
  const size_t n_workers = std::max<size_t>(
      1, std::min<size_t>(config.concurrency, questions.size()));
  std::vector<std::thread> threads;
  for (size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  partial.close();
  if (fatal) std::rethrow_exception(fatal);

  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.Key() < b.Key(); });
  std::vector<QuestionResult> results;
  std::string diagnostics;
  for (const auto& row : rows) {
    const auto& diags = row.result ? row.result->diagnostics : row.diagnostics;
    for (const auto& d : diags) {
      Json j = DiagnosticToJson(d);
      j["mode"] = ExplanationModeName(row.mode);
      j["strategy"] = StrategyName(row.strategy);
      diagnostics += j.dump() + "\n";
    }
    if (row.result) {
      results.push_back(*row.result);
    } else {
      ++outcome.failed_rows;
    }
    if (row.backend_failure) outcome.status = RunStatus::kBackendErrors;
  }
  WriteFile(outcome.run_dir / "results.jsonl", ResultsJsonl(results));
  WriteFile(outcome.run_dir / "diagnostics.jsonl", diagnostics);
  WriteReport(outcome.run_dir, results);

  if (budget_exceeded.load()) outcome.status = RunStatus::kBudgetExceeded;
  outcome.results = results.size();
  outcome.stats = gateway.stats();
  return outcome;
}

RunReport ReportRun(const fs::path& run_dir) {
  const std::string content =
      ReadFile(run_dir / "results.jsonl", ErrorCode::kFormatError);
  std::vector<QuestionResult> results;
  std::istringstream lines(content);
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    if (line.empty()) continue;
    results.push_back(ResultFromJson(
        ParseJsonText(line, "results.jsonl:" + std::to_string(number))));
  }
  if (results.empty()) {
    throw Error(ErrorCode::kFormatError, "run directory has no results",
                run_dir.string());
  }
  RunReport report = SummarizeRun(results);
  WriteReport(run_dir, results);
  return report;
}

}  // namespace nleu
