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

// nleu command line: run, paraphrase, score, report.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nleu/agreement.h"
#include "nleu/config.h"
#include "nleu/errors.h"
#include "nleu/gateway.h"
#include "nleu/perturbation.h"
#include "nleu/pipeline.h"
#include "nleu/serialization.h"

namespace {

namespace fs = std::filesystem;

constexpr int kFailure = 1;

struct BackendFlags {
  std::string fixture;
  uint64_t seed = 0;
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string api_style = "chat";
  std::string token_env = "OPENAI_API_KEY";
  std::string response_field = "choices.0.message.content";
  int max_retries = 3;
  int timeout_seconds = 60;
  std::string model = "mock";
  std::string cache;

  void Register(CLI::App* app) {
    app->add_option("--fixture", fixture, "Scripted mock fixture (JSON lines)");
    app->add_option("--mock-seed", seed, "Seed for seeded mock rules");
    app->add_option("--base-url", base_url, "HTTP backend base URL");
    app->add_option("--api-path", path, "HTTP endpoint path");
    app->add_option("--api-style", api_style, "chat or completions")
        ->check(CLI::IsMember({"chat", "completions"}));
    app->add_option("--token-env", token_env,
                    "Environment variable holding the API token");
    app->add_option("--response-field", response_field,
                    "Dotted path to the completion text");
    app->add_option("--max-retries", max_retries, "Retries per request")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--timeout", timeout_seconds, "Request timeout in seconds")
        ->check(CLI::PositiveNumber);
    app->add_option("--model", model, "Model name");
    app->add_option("--cache", cache, "Response cache file");
  }

  bool configured() const { return !fixture.empty() || !base_url.empty(); }

  std::unique_ptr<nleu::ModelGateway> MakeGateway() const {
    std::shared_ptr<nleu::CompletionBackend> backend;
    if (!fixture.empty()) {
      backend = nleu::ScriptedBackend::FromFile(fixture, seed);
    } else if (!base_url.empty()) {
      nleu::HttpBackendOptions options;
      options.base_url = base_url;
      options.path = path;
      options.api_style = api_style;
      options.token_env = token_env;
      options.response_field = response_field;
      options.max_retries = max_retries;
      options.timeout_seconds = timeout_seconds;
      backend = std::make_shared<nleu::HttpBackend>(options);
    } else {
      throw nleu::Error(nleu::ErrorCode::kConfigError,
                        "a backend is required", "--fixture or --base-url");
    }
    auto store = cache.empty() ? std::make_shared<nleu::ResponseCache>()
                               : std::make_shared<nleu::ResponseCache>(cache);
    return std::make_unique<nleu::ModelGateway>(backend, store);
  }
};

void PrintError(const nleu::Error& e) {
  std::cerr << "error: " << e.what();
  if (!e.context().empty()) std::cerr << " [" << e.context() << "]";
  std::cerr << "\n";
}

std::string ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw nleu::Error(nleu::ErrorCode::kFormatError, "cannot read file", path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int CmdRun(const std::string& config_path,
           const std::vector<std::string>& overrides) {
  std::ifstream in(config_path);
  if (!in) {
    throw nleu::Error(nleu::ErrorCode::kConfigError, "cannot read config file",
                      config_path);
  }
  nleu::Json document = nleu::Json::parse(in, nullptr, false);
  if (document.is_discarded()) {
    throw nleu::Error(nleu::ErrorCode::kConfigError,
                      "config file is not valid JSON", config_path);
  }
  for (const auto& o : overrides) nleu::ApplyOverride(document, o);
  const nleu::RunConfig config = nleu::ConfigFromJson(
      document, fs::absolute(config_path).parent_path());
  const nleu::RunOutcome outcome = nleu::RunPipeline(config);
  std::cout << "run directory: " << outcome.run_dir.string() << "\n"
            << "results: " << outcome.results
            << ", failed rows: " << outcome.failed_rows << "\n"
            << "backend calls: " << outcome.stats.backend_calls
            << ", cache hits: " << outcome.stats.cache_hits << "\n";
  if (outcome.status == nleu::RunStatus::kBudgetExceeded) {
    std::cerr << "budget exhausted; partial results written\n";
  } else if (outcome.status == nleu::RunStatus::kBackendErrors) {
    std::cerr << "some rows failed on backend errors; see diagnostics.jsonl\n";
  }
  return nleu::ExitCode(outcome.status);
}

int CmdParaphrase(const std::string& text, int n, const BackendFlags& flags) {
  auto gateway = flags.MakeGateway();
  nleu::Question q{.id = "cli", .text = text,
                   .kind = nleu::DatasetKind::kMathWord,
                   .gold_answer = std::nullopt};
  nleu::ElicitationOptions options;
  options.model_name = flags.model;
  for (const auto& p : nleu::CollectParaphrases(*gateway, q, n, options)) {
    std::cout << p << "\n";
  }
  return 0;
}

int CmdScore(const std::string& path, std::optional<int> k,
             std::optional<std::string> entailment, const BackendFlags& flags) {
  const nleu::Json j = nleu::ParseJsonText(ReadAll(path), path);
  if (!j.is_object() || !j.contains("perturbed")) {
    throw nleu::Error(nleu::ErrorCode::kFormatError,
                      "file is not a serialized probing set", path);
  }
  const nleu::ProbingSet set = nleu::ProbingSetFromJson(j);
  const nleu::Json* scores = j.contains("scores") ? &j["scores"] : nullptr;
  if (!k) {
    k = (scores && scores->contains("k") && (*scores)["k"].is_number_integer())
            ? (*scores)["k"].get<int>()
            : 3;
  }
  if (!entailment) {
    entailment = (scores && scores->contains("entailment") &&
                  (*scores)["entailment"].is_string())
                     ? (*scores)["entailment"].get<std::string>()
                     : "overlap:0.6";
  }
  double confidence = 0.0;
  if (set.mode == nleu::ExplanationMode::kTokenImportance) {
    confidence = nleu::TokenImportanceUncertainty(set, *k).value();
  } else {
    nleu::EntailmentBackendSpec spec =
        nleu::EntailmentBackendSpec::Parse(*entailment);
    std::unique_ptr<nleu::ModelGateway> gateway;
    if (spec.kind == nleu::EntailmentBackendSpec::Kind::kLlmJudge) {
      gateway = flags.MakeGateway();
      if (spec.model_name.empty()) spec.model_name = flags.model;
    }
    auto entailer = nleu::MakeEntailer(spec, gateway.get());
    confidence = nleu::CoTUncertainty(set, *entailer).value();
  }
  std::printf("%.4f\n", confidence);
  return 0;
}

int CmdReport(const std::string& run_dir) {
  nleu::ReportRun(run_dir);
  std::cout << ReadAll((fs::path(run_dir) / "report.json").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty of natural-language explanations from LLMs"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string dataset;
  std::string output_dir;
  std::optional<int64_t> budget;
  std::optional<int> subset;
  std::optional<uint64_t> seed;
  std::optional<int> concurrency;
  auto* run = app.add_subcommand("run", "Run the full pipeline from a config");
  run->add_option("config", config_path, "Run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--set", overrides, "Override a config field: key=value");
  run->add_option("--dataset", dataset, "Override dataset.path");
  run->add_option("--output-dir", output_dir, "Override output_dir");
  run->add_option("--budget", budget, "Maximum backend calls");
  run->add_option("--subset", subset, "Number of sampled questions");
  run->add_option("--seed", seed, "Subset sampling seed");
  run->add_option("--concurrency", concurrency, "Maximum requests in flight");

  std::string question;
  int n = 10;
  BackendFlags paraphrase_flags;
  auto* paraphrase =
      app.add_subcommand("paraphrase", "Print paraphrases of a question");
  paraphrase->add_option("question", question, "Question text")->required();
  paraphrase->add_option("-n,--n", n, "Number of paraphrases")
      ->check(CLI::Range(1, 1000));
  paraphrase_flags.Register(paraphrase);

  std::string probing_file;
  std::optional<int> k;
  std::optional<std::string> entailment;
  BackendFlags score_flags;
  auto* score = app.add_subcommand(
      "score", "Recompute the confidence of a stored probing set");
  score->add_option("file", probing_file, "Probing set JSON")->required();
  score->add_option("--k", k, "Top-k tokens for token importance")
      ->check(CLI::PositiveNumber);
  score->add_option("--entailment", entailment,
                    "exact, overlap[:threshold] or llm");
  score_flags.Register(score);

  std::string run_dir;
  auto* report =
      app.add_subcommand("report", "Re-summarize an existing run directory");
  report->add_option("run_dir", run_dir, "Run directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every usage error exits 1.
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      if (!dataset.empty()) {
        overrides.push_back("dataset.path=" +
                            nleu::Json(fs::absolute(dataset).string()).dump());
      }
      if (!output_dir.empty()) {
        overrides.push_back("output_dir=" +
                            nleu::Json(fs::absolute(output_dir).string()).dump());
      }
      if (budget) overrides.push_back("budget=" + std::to_string(*budget));
      if (subset) overrides.push_back("subset=" + std::to_string(*subset));
      if (seed) overrides.push_back("seed=" + std::to_string(*seed));
      if (concurrency) {
        overrides.push_back("concurrency=" + std::to_string(*concurrency));
      }
      return CmdRun(config_path, overrides);
    }
    if (*paraphrase) return CmdParaphrase(question, n, paraphrase_flags);
    if (*score) return CmdScore(probing_file, k, entailment, score_flags);
    if (*report) return CmdReport(run_dir);
  } catch (const nleu::Error& e) {
    PrintError(e);
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
