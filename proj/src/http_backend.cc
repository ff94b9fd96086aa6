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

#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "nleu/errors.h"
#include "nleu/gateway.h"

namespace nleu {
namespace {

using nlohmann::json;

bool IsRetryableStatus(int status) { return status == 429 || status >= 500; }

// Walks "choices.0.message.content"-style paths.
const json* FollowPath(const json& root, const std::string& path) {
  const json* node = &root;
  size_t start = 0;
  while (start <= path.size()) {
    const size_t dot = path.find('.', start);
    const std::string part = path.substr(
        start, dot == std::string::npos ? std::string::npos : dot - start);
    if (node->is_array()) {
      char* end = nullptr;
      const unsigned long idx = std::strtoul(part.c_str(), &end, 10);
      if (part.empty() || *end != '\0' || idx >= node->size()) return nullptr;
      node = &(*node)[idx];
    } else if (node->is_object()) {
      auto it = node->find(part);
      if (it == node->end()) return nullptr;
      node = &*it;
    } else {
      return nullptr;
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return node;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendOptions options)
    : options_(std::move(options)) {
  if (options_.base_url.empty()) {
    throw Error(ErrorCode::kConfigError, "http backend needs a base_url",
                "backend.base_url");
  }
  if (options_.api_style != "chat" && options_.api_style != "completions") {
    throw Error(ErrorCode::kConfigError,
                "api_style must be \"chat\" or \"completions\"",
                "backend.api_style");
  }
}

std::string HttpBackend::id() const {
  return "http:" + options_.base_url + options_.path;
}

std::string HttpBackend::Complete(const CompletionRequest& request) {
  json body = {{"model", request.params.model_name},
               {"temperature", request.params.temperature},
               {"max_tokens", request.params.max_tokens}};
  if (options_.api_style == "chat") {
    body["messages"] = json::array({{{"role", "user"},
                                     {"content", request.prompt}}});
  } else {
    body["prompt"] = request.prompt;
  }
  if (request.params.seed) body["seed"] = *request.params.seed;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!options_.token_env.empty()) {
    if (const char* token = std::getenv(options_.token_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  std::string last_transport_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          static_cast<int64_t>(options_.initial_backoff_ms) << (attempt - 1)));
    }
    httplib::Client client(options_.base_url);
    client.set_connection_timeout(options_.timeout_seconds, 0);
    client.set_read_timeout(options_.timeout_seconds, 0);
    client.set_write_timeout(options_.timeout_seconds, 0);
    auto result =
        client.Post(options_.path, headers, payload, "application/json");
    if (!result) {
      last_transport_error = httplib::to_string(result.error());
      continue;
    }
    const int status = result->status;
    if (status >= 200 && status < 300) {
      const json parsed = json::parse(result->body, nullptr, false);
      if (parsed.is_discarded()) {
        throw Error(ErrorCode::kBackendError, "response body is not JSON",
                    result->body);
      }
      const json* text = FollowPath(parsed, options_.response_field);
      if (text == nullptr || !text->is_string()) {
        throw Error(ErrorCode::kBackendError,
                    "response has no string at " + options_.response_field,
                    result->body);
      }
      return text->get<std::string>();
    }
    if (IsRetryableStatus(status) && attempt < options_.max_retries) continue;
    throw Error(ErrorCode::kBackendError,
                "backend returned HTTP " + std::to_string(status),
                result->body);
  }
  throw Error(ErrorCode::kNetworkError,
              "request to " + options_.base_url + " failed after " +
                  std::to_string(options_.max_retries + 1) + " attempts: " +
                  last_transport_error);
}

}  // namespace nleu
