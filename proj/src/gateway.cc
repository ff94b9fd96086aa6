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

#include "nleu/gateway.h"

#include <chrono>
#include <ctime>
#include <exception>
#include <future>
#include <utility>

#include "json.hpp"
#include "nleu/digest.h"
#include "nleu/errors.h"

namespace nleu {
namespace {

using nlohmann::json;

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Tracks the in-flight count and releases the concurrency slot on scope exit.
class InFlightGuard {
 public:
  InFlightGuard(std::counting_semaphore<>& slots, std::atomic<int64_t>& in_flight,
                std::atomic<int64_t>& max_in_flight)
      : slots_(slots), in_flight_(in_flight) {
    slots_.acquire();
    const int64_t now = in_flight_.fetch_add(1) + 1;
    int64_t seen = max_in_flight.load();
    while (now > seen && !max_in_flight.compare_exchange_weak(seen, now)) {
    }
  }
  ~InFlightGuard() {
    in_flight_.fetch_sub(1);
    slots_.release();
  }
  InFlightGuard(const InFlightGuard&) = delete;
  InFlightGuard& operator=(const InFlightGuard&) = delete;

 private:
  std::counting_semaphore<>& slots_;
  std::atomic<int64_t>& in_flight_;
};

}  // namespace

std::string CacheKey(const std::string& backend_id,
                     const CompletionRequest& request) {
  const json material = json::array({backend_id, request.params.model_name,
                                     request.prompt, request.params.temperature,
                                     request.sample_index});
  return Sha256Hex(material.dump());
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(path) {
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (record.is_discarded() || !record.contains("cache_key") ||
          !record.contains("response")) {
        continue;
      }
      entries_[record["cache_key"].get<std::string>()] =
          record["response"].get<std::string>();
    }
  } else if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  sink_.open(path, std::ios::app);
  if (!sink_) {
    throw Error(ErrorCode::kConfigError, "cannot open cache file for append",
                path.string());
  }
}

std::optional<std::string> ResponseCache::Lookup(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::Store(CacheRecord record) {
  std::unique_lock lock(mutex_);
  if (sink_.is_open()) {
    const json line = {
        {"cache_key", record.cache_key},
        {"prompt", record.prompt},
        {"params",
         {{"backend", record.backend_id},
          {"model", record.model_name},
          {"temperature", record.temperature},
          {"max_tokens", record.max_tokens},
          {"sample_index", record.sample_index}}},
        {"response", record.response},
        {"timestamp", record.timestamp},
    };
    sink_ << line.dump() << '\n';
    sink_.flush();
  }
  entries_[std::move(record.cache_key)] = std::move(record.response);
}

size_t ResponseCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

ModelGateway::ModelGateway(std::shared_ptr<CompletionBackend> backend,
                           std::shared_ptr<ResponseCache> cache,
                           GatewayOptions options)
    : backend_(std::move(backend)),
      cache_(cache ? std::move(cache) : std::make_shared<ResponseCache>()),
      options_(options),
      backend_id_(backend_ ? backend_->id() : std::string()),
      slots_(options.max_concurrency > 0 ? options.max_concurrency : 1) {
  if (!backend_) {
    throw Error(ErrorCode::kConfigError, "gateway needs a backend");
  }
}

std::string ModelGateway::Complete(const CompletionRequest& request) {
  if (request.prompt.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "completion prompt is empty");
  }
  const std::string key = CacheKey(backend_id_, request);
  if (!request.cache_bypass) {
    if (auto hit = cache_->Lookup(key)) {
      cache_hits_.fetch_add(1);
      return *std::move(hit);
    }
  }
  if (options_.budget) {
    if (reserved_calls_.fetch_add(1) >= *options_.budget) {
      reserved_calls_.fetch_sub(1);
      throw Error(ErrorCode::kBudgetExceeded,
                  "request budget of " + std::to_string(*options_.budget) +
                      " backend calls exhausted");
    }
  }

  std::string response;
  {
    InFlightGuard guard(slots_, in_flight_, max_in_flight_);
    backend_calls_.fetch_add(1);
    response = backend_->Complete(request);
  }
  cache_->Store({.cache_key = key,
                 .prompt = request.prompt,
                 .backend_id = backend_id_,
                 .model_name = request.params.model_name,
                 .temperature = request.params.temperature,
                 .max_tokens = request.params.max_tokens,
                 .sample_index = request.sample_index,
                 .response = response,
                 .timestamp = UtcTimestamp()});
  return response;
}

std::vector<std::string> ModelGateway::CompleteN(
    const CompletionRequest& request, int n) {
  if (n < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "CompleteN needs n >= 1, got " + std::to_string(n));
  }
  std::vector<std::future<std::string>> pending;
  pending.reserve(n);
  for (int i = 1; i <= n; ++i) {
    CompletionRequest draw = request;
    draw.sample_index = i;
    pending.push_back(std::async(std::launch::async,
                                 [this, draw = std::move(draw)] {
                                   return Complete(draw);
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
  return responses;
}

GatewayStats ModelGateway::stats() const {
  return {.cache_hits = cache_hits_.load(),
          .backend_calls = backend_calls_.load(),
          .max_in_flight = max_in_flight_.load()};
}

}  // namespace nleu
