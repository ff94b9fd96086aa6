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

// Uniform access to completion backends with a persistent response cache, a
// request budget and a bound on in-flight requests.

#ifndef NLEU_GATEWAY_H_
#define NLEU_GATEWAY_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "nleu/domain.h"

namespace nleu {

struct CompletionRequest {
  std::string prompt;
  GenerationParams params;
  // Distinguishes repeated draws of the same prompt. 0 is a single draw;
  // CompleteN uses 1..n.
  int sample_index = 0;
  // Skip the cache lookup (the fresh response is still stored).
  bool cache_bypass = false;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;

  // Stable identifier that participates in cache keys.
  virtual std::string id() const = 0;

  // Must be safe to call concurrently.
  virtual std::string Complete(const CompletionRequest& request) = 0;
};

// Digest of (backend id, model name, prompt, temperature, sample index).
std::string CacheKey(const std::string& backend_id,
                     const CompletionRequest& request);

struct CacheRecord {
  std::string cache_key;
  std::string prompt;
  std::string backend_id;
  std::string model_name;
  double temperature = 0.0;
  int max_tokens = 0;
  int sample_index = 0;
  std::string response;
  std::string timestamp;  // ISO-8601 UTC
};

// Append-only JSON-lines response store. When a key appears more than once,
// the last record wins. Readers run concurrently; writers are serialized.
class ResponseCache {
 public:
  // In-memory only.
  ResponseCache() = default;

  // Loads `path` when it exists and appends new records to it. A truncated
  // final line (interrupted write) is ignored.
  explicit ResponseCache(std::filesystem::path path);

  std::optional<std::string> Lookup(const std::string& key) const;
  void Store(CacheRecord record);
  size_t size() const;
  const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::ofstream sink_;
};

struct GatewayOptions {
  int max_concurrency = 4;
  // Maximum number of backend calls (cache hits are free). Unset means
  // unlimited.
  std::optional<int64_t> budget;
};

struct GatewayStats {
  int64_t cache_hits = 0;
  int64_t backend_calls = 0;
  int64_t max_in_flight = 0;
};

class ModelGateway {
 public:
  ModelGateway(std::shared_ptr<CompletionBackend> backend,
               std::shared_ptr<ResponseCache> cache,
               GatewayOptions options = {});

  ModelGateway(const ModelGateway&) = delete;
  ModelGateway& operator=(const ModelGateway&) = delete;

  // Throws kBudgetExceeded when a cache miss would exceed the budget, and
  // propagates backend errors (kNetworkError, kBackendError).
  std::string Complete(const CompletionRequest& request);

  // `n` draws with sample indices 1..n, issued concurrently and returned in
  // index order. All-or-nothing: any failure discards the batch and rethrows
  // the lowest-index error.
  std::vector<std::string> CompleteN(const CompletionRequest& request, int n);

  GatewayStats stats() const;
  const std::string& backend_id() const { return backend_id_; }

 private:
  std::shared_ptr<CompletionBackend> backend_;
  std::shared_ptr<ResponseCache> cache_;
  GatewayOptions options_;
  std::string backend_id_;
  std::counting_semaphore<> slots_;
  std::atomic<int64_t> cache_hits_{0};
  std::atomic<int64_t> backend_calls_{0};
  std::atomic<int64_t> reserved_calls_{0};
  std::atomic<int64_t> in_flight_{0};
  std::atomic<int64_t> max_in_flight_{0};
};

// Scripted backend for offline runs. Reads a JSON-lines fixture where each
// record is
//
//   {"match": {"digest": "<sha256 hex of the prompt>"}, "responses": [...]}
//   {"match": {"regex": "<ECMAScript regex searched in the prompt>"},
//    "responses": [...], "pick": "cycle" | "seeded"}
//
// Digest rules take precedence; regex rules are tried in file order. With
// "cycle" (the default) draw i >= 1 gets responses[(i - 1) % size] and draw 0
// gets responses[0]. With "seeded" the index is a hash of (seed, prompt,
// sample index), so stochastic fixtures remain reproducible.
class ScriptedBackend : public CompletionBackend {
 public:
  struct Rule {
    std::optional<std::string> digest;
    std::optional<std::string> pattern;
    std::vector<std::string> responses;
    bool seeded = false;
  };

  ScriptedBackend(std::vector<Rule> rules, uint64_t seed = 0);
  static std::shared_ptr<ScriptedBackend> FromFile(
      const std::filesystem::path& fixture, uint64_t seed = 0);
  static std::shared_ptr<ScriptedBackend> FromJsonLines(
      const std::string& content, uint64_t seed = 0);

  std::string id() const override { return id_; }

  // Throws kBackendError when no rule matches.
  std::string Complete(const CompletionRequest& request) override;

  int64_t calls() const { return calls_.load(); }

 private:
  struct CompiledRule;
  std::vector<std::shared_ptr<const CompiledRule>> rules_;
  std::unordered_map<std::string, std::shared_ptr<const CompiledRule>>
      by_digest_;
  uint64_t seed_;
  std::string id_;
  std::atomic<int64_t> calls_{0};
};

struct HttpBackendOptions {
  // Scheme, host and optional port, e.g. "https://api.openai.com".
  std::string base_url;
  std::string path = "/v1/chat/completions";
  // "chat" sends {"messages": [{"role": "user", ...}]}; "completions" sends
  // {"prompt": ...}.
  std::string api_style = "chat";
  // Environment variable holding the bearer token. Empty disables auth.
  std::string token_env = "OPENAI_API_KEY";
  // Dotted path to the text in the response body; numeric parts index arrays.
  std::string response_field = "choices.0.message.content";
  int timeout_seconds = 60;
  // Retries after the first attempt, on transport errors, 429 and 5xx.
  int max_retries = 3;
  // Backoff before retry r (1-based) is initial_backoff_ms * 2^(r-1).
  int initial_backoff_ms = 1000;
};

class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);

  std::string id() const override;

  // kNetworkError when the transport fails on every attempt; kBackendError for
  // any other non-2xx status (body preserved as the error context) or a
  // response without the configured field.
  std::string Complete(const CompletionRequest& request) override;

 private:
  HttpBackendOptions options_;
};

}  // namespace nleu

#endif  // NLEU_GATEWAY_H_
