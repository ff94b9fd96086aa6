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

#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "nleu/digest.h"
#include "nleu/errors.h"
#include "nleu/gateway.h"

namespace nleu {

struct ScriptedBackend::CompiledRule {
  Rule rule;
  std::optional<std::regex> regex;
};

namespace {

using nlohmann::json;

uint64_t Fnv1a(std::string_view data, uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

ScriptedBackend::ScriptedBackend(std::vector<Rule> rules, uint64_t seed)
    : seed_(seed) {
  json canonical = json::array();
  for (auto& rule : rules) {
    if (rule.responses.empty()) {
      throw Error(ErrorCode::kConfigError, "mock rule has no responses");
    }
    if (rule.digest.has_value() == rule.pattern.has_value()) {
      throw Error(ErrorCode::kConfigError,
                  "mock rule needs exactly one of digest or regex");
    }
    canonical.push_back({{"digest", rule.digest.value_or("")},
                         {"regex", rule.pattern.value_or("")},
                         {"responses", rule.responses},
                         {"seeded", rule.seeded}});
    auto compiled = std::make_shared<CompiledRule>();
    compiled->rule = std::move(rule);
    if (compiled->rule.pattern) {
      try {
        compiled->regex.emplace(*compiled->rule.pattern);
      } catch (const std::regex_error& e) {
        throw Error(ErrorCode::kConfigError,
                    std::string("invalid mock regex: ") + e.what(),
                    *compiled->rule.pattern);
      }
      rules_.push_back(compiled);
    } else {
      by_digest_.emplace(*compiled->rule.digest, compiled);
    }
  }
  id_ = "scripted:" + Sha256Hex(canonical.dump()).substr(0, 16) + ":" +
        std::to_string(seed_);
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::FromJsonLines(
    const std::string& content, uint64_t seed) {
  std::vector<Rule> rules;
  std::istringstream in(content);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json record = json::parse(line, nullptr, false);
    const std::string where = "fixture line " + std::to_string(line_no);
    if (record.is_discarded() || !record.is_object()) {
      throw Error(ErrorCode::kFormatError, "mock fixture line is not JSON",
                  where);
    }
    if (!record.contains("match") || !record["match"].is_object() ||
        !record.contains("responses") || !record["responses"].is_array()) {
      throw Error(ErrorCode::kFormatError,
                  "mock record needs \"match\" and \"responses\"", where);
    }
    Rule rule;
    const json& match = record["match"];
    if (match.contains("digest")) {
      rule.digest = match["digest"].get<std::string>();
    }
    if (match.contains("regex")) {
      rule.pattern = match["regex"].get<std::string>();
    }
    for (const auto& r : record["responses"]) {
      if (!r.is_string()) {
        throw Error(ErrorCode::kFormatError, "mock responses must be strings",
                    where);
      }
      rule.responses.push_back(r.get<std::string>());
    }
    const std::string pick = record.value("pick", std::string("cycle"));
    if (pick != "cycle" && pick != "seeded") {
      throw Error(ErrorCode::kFormatError, "unknown pick mode", where);
    }
    rule.seeded = pick == "seeded";
    rules.push_back(std::move(rule));
  }
  return std::make_shared<ScriptedBackend>(std::move(rules), seed);
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::FromFile(
    const std::filesystem::path& fixture, uint64_t seed) {
  std::ifstream in(fixture);
  if (!in) {
    throw Error(ErrorCode::kConfigError, "cannot read mock fixture",
                fixture.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FromJsonLines(buffer.str(), seed);
}

std::string ScriptedBackend::Complete(const CompletionRequest& request) {
  calls_.fetch_add(1);
  const CompiledRule* rule = nullptr;
  if (!by_digest_.empty()) {
    auto it = by_digest_.find(Sha256Hex(request.prompt));
    if (it != by_digest_.end()) rule = it->second.get();
  }
  if (rule == nullptr) {
    for (const auto& r : rules_) {
      if (std::regex_search(request.prompt, *r->regex)) {
        rule = r.get();
        break;
      }
    }
  }
  if (rule == nullptr) {
    throw Error(ErrorCode::kBackendError, "no mock rule matches the prompt",
                request.prompt.substr(0, 200));
  }
  const auto& responses = rule->rule.responses;
  size_t index = 0;
  if (rule->rule.seeded) {
    const uint64_t h = Fnv1a(request.prompt, Fnv1a(std::to_string(seed_)));
    index = SplitMix64(h ^ static_cast<uint64_t>(request.sample_index)) %
            responses.size();
  } else if (request.sample_index > 0) {
    index = static_cast<size_t>(request.sample_index - 1) % responses.size();
  }
  return responses[index];
}

}  // namespace nleu
