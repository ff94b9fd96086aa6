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

#include "nleu/config.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "nleu/agreement.h"
#include "nleu/digest.h"
#include "nleu/errors.h"

namespace nleu {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void Fail(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kConfigError, why, field);
}

void CheckKeys(const Json& j, const std::string& prefix,
               const std::set<std::string>& allowed) {
  if (!j.is_object()) Fail(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) Fail(prefix + key, "unknown field");
  }
}

class Reader {
 public:
  Reader(const Json& j, std::string prefix)
      : j_(j), prefix_(std::move(prefix)) {}

  bool Has(const char* key) const {
    auto it = j_.find(key);
    return it != j_.end() && !it->is_null();
  }
  std::string Name(const char* key) const { return prefix_ + key; }

  std::string String(const char* key) const {
    const Json& v = j_.at(key);
    if (!v.is_string()) Fail(Name(key), "expected a string");
    return v.get<std::string>();
  }
  int64_t Integer(const char* key, int64_t min) const {
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) Fail(Name(key), "expected an integer");
    const int64_t value = v.get<int64_t>();
    if (value < min) {
      Fail(Name(key), "must be >= " + std::to_string(min));
    }
    return value;
  }
  uint64_t Unsigned(const char* key) const {
    const Json& v = j_.at(key);
    // Programmatic documents hold signed integers even when non-negative.
    if (!v.is_number_unsigned() &&
        !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
      Fail(Name(key), "expected a non-negative integer");
    }
    return v.get<uint64_t>();
  }
  double Number(const char* key) const {
    const Json& v = j_.at(key);
    if (!v.is_number()) Fail(Name(key), "expected a number");
    return v.get<double>();
  }
  bool Bool(const char* key) const {
    const Json& v = j_.at(key);
    if (!v.is_boolean()) Fail(Name(key), "expected a boolean");
    return v.get<bool>();
  }
  std::vector<std::string> Strings(const char* key) const {
    const Json& v = j_.at(key);
    if (!v.is_array() || v.empty()) Fail(Name(key), "expected a non-empty array");
    std::vector<std::string> out;
    for (const auto& item : v) {
      if (!item.is_string()) Fail(Name(key), "expected strings");
      out.push_back(item.get<std::string>());
    }
    return out;
  }
  const Json& Object(const char* key) const { return j_.at(key); }

 private:
  const Json& j_;
  std::string prefix_;
};

fs::path Resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

std::string FileDigest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "missing";
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return Sha256Hex(buffer.str());
}

}  // namespace

RunConfig ConfigFromJson(const Json& j, const fs::path& base_dir) {
  CheckKeys(j, "",
            {"backend", "model_name", "paraphrase_model", "max_tokens", "dataset", "modes",
             "strategies", "n_paraphrases", "n_samples", "tau", "k", "subset",
             "seed", "entailment", "synonyms", "faithfulness", "budget",
             "concurrency", "output_dir", "cache_path"});
  RunConfig c;
  Reader r(j, "");

  if (!r.Has("backend")) Fail("backend", "missing field");
  {
    const Json& b = r.Object("backend");
    CheckKeys(b, "backend.",
              {"kind", "fixture", "seed", "base_url", "path", "api_style",
               "token_env", "response_field", "timeout_seconds", "max_retries",
               "initial_backoff_ms"});
    Reader br(b, "backend.");
    if (br.Has("kind")) c.backend.kind = br.String("kind");
    if (c.backend.kind == "mock") {
      if (!br.Has("fixture")) Fail("backend.fixture", "missing field");
      c.backend.fixture = Resolve(base_dir, br.String("fixture"));
      if (br.Has("seed")) c.backend.seed = br.Unsigned("seed");
    } else if (c.backend.kind == "http") {
      if (!br.Has("base_url")) Fail("backend.base_url", "missing field");
      auto& h = c.backend.http;
      h.base_url = br.String("base_url");
      if (br.Has("path")) h.path = br.String("path");
      if (br.Has("api_style")) h.api_style = br.String("api_style");
      if (h.api_style != "chat" && h.api_style != "completions") {
        Fail("backend.api_style", "expected \"chat\" or \"completions\"");
      }
      if (br.Has("token_env")) h.token_env = br.String("token_env");
      if (br.Has("response_field")) h.response_field = br.String("response_field");
      if (br.Has("timeout_seconds")) {
        h.timeout_seconds = static_cast<int>(br.Integer("timeout_seconds", 1));
      }
      if (br.Has("max_retries")) {
        h.max_retries = static_cast<int>(br.Integer("max_retries", 0));
      }
      if (br.Has("initial_backoff_ms")) {
        h.initial_backoff_ms =
            static_cast<int>(br.Integer("initial_backoff_ms", 0));
      }
    } else {
      Fail("backend.kind", "expected \"mock\" or \"http\"");
    }
  }

  if (r.Has("model_name")) c.model_name = r.String("model_name");
  if (r.Has("paraphrase_model")) {
    c.paraphrase_model = r.String("paraphrase_model");
  }
  if (r.Has("max_tokens")) {
    c.max_tokens = static_cast<int>(r.Integer("max_tokens", 1));
  }

  if (!r.Has("dataset")) Fail("dataset.path", "missing field");
  {
    const Json& d = r.Object("dataset");
    CheckKeys(d, "dataset.", {"path", "kind"});
    Reader dr(d, "dataset.");
    if (!dr.Has("path")) Fail("dataset.path", "missing field");
    c.dataset_path = Resolve(base_dir, dr.String("path"));
    if (dr.Has("kind")) {
      c.dataset_kind = ParseDatasetKind(dr.String("kind"));
      if (!c.dataset_kind) Fail("dataset.kind", "unknown dataset kind");
    }
  }

  if (r.Has("modes")) {
    c.modes.clear();
    for (const auto& name : r.Strings("modes")) {
      auto mode = ParseExplanationMode(name);
      if (!mode) Fail("modes", "unknown mode '" + name + "'");
      if (std::find(c.modes.begin(), c.modes.end(), *mode) == c.modes.end()) {
        c.modes.push_back(*mode);
      }
    }
  }
  if (r.Has("strategies")) {
    c.strategies.clear();
    for (const auto& name : r.Strings("strategies")) {
      auto strategy = ParseStrategy(name);
      if (!strategy) Fail("strategies", "unknown strategy '" + name + "'");
      if (std::find(c.strategies.begin(), c.strategies.end(), *strategy) ==
          c.strategies.end()) {
        c.strategies.push_back(*strategy);
      }
    }
  }
  if (r.Has("n_paraphrases")) {
    c.n_paraphrases = static_cast<int>(r.Integer("n_paraphrases", 1));
  }
  if (r.Has("n_samples")) {
    c.n_samples = static_cast<int>(r.Integer("n_samples", 1));
  }
  if (r.Has("tau")) {
    c.tau = r.Number("tau");
    if (!(c.tau >= 0.0)) Fail("tau", "must be >= 0");
  }
  if (r.Has("k")) c.k = static_cast<int>(r.Integer("k", 1));
  if (r.Has("subset")) c.subset = static_cast<int>(r.Integer("subset", 1));
  if (r.Has("seed")) c.seed = r.Unsigned("seed");
  if (r.Has("entailment")) {
    c.entailment = r.String("entailment");
    if (c.entailment != "auto") {
      try {
        EntailmentBackendSpec::Parse(c.entailment);
      } catch (const Error& e) {
        Fail("entailment", e.what());
      }
    }
  }
  if (r.Has("synonyms")) {
    const Json& s = r.Object("synonyms");
    CheckKeys(s, "synonyms.", {"kind", "path"});
    Reader sr(s, "synonyms.");
    if (sr.Has("kind")) c.synonyms.kind = sr.String("kind");
    if (c.synonyms.kind != "auto" && c.synonyms.kind != "wordlist" &&
        c.synonyms.kind != "llm") {
      Fail("synonyms.kind", "expected \"auto\", \"wordlist\" or \"llm\"");
    }
    if (sr.Has("path")) c.synonyms.path = Resolve(base_dir, sr.String("path"));
  }
  if (r.Has("faithfulness")) c.faithfulness = r.Bool("faithfulness");
  if (r.Has("budget")) c.budget = r.Integer("budget", 0);
  if (r.Has("concurrency")) {
    c.concurrency = static_cast<int>(r.Integer("concurrency", 1));
  }
  if (r.Has("output_dir")) c.output_dir = Resolve(base_dir, r.String("output_dir"));
  else c.output_dir = Resolve(base_dir, "runs");
  if (r.Has("cache_path")) c.cache_path = Resolve(base_dir, r.String("cache_path"));
  return c;
}

RunConfig LoadConfig(const fs::path& path) {
  std::ifstream in(path);
  if (!in) Fail("config", "cannot read config file " + path.string());
  const Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) Fail("config", "config file is not valid JSON");
  return ConfigFromJson(j, fs::absolute(path).parent_path());
}

void ApplyOverride(Json& document, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    Fail(assignment, "override must look like key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &document;
  size_t start = 0;
  while (true) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) Fail(key, "empty key segment");
    if (!node->is_object()) Fail(key, "cannot descend into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

Json ConfigToJson(const RunConfig& c) {
  Json backend = {{"kind", c.backend.kind}};
  if (c.backend.kind == "mock") {
    backend["fixture"] = c.backend.fixture.string();
    backend["seed"] = c.backend.seed;
  } else {
    const auto& h = c.backend.http;
    backend["base_url"] = h.base_url;
    backend["path"] = h.path;
    backend["api_style"] = h.api_style;
    backend["token_env"] = h.token_env;
    backend["response_field"] = h.response_field;
    backend["timeout_seconds"] = h.timeout_seconds;
    backend["max_retries"] = h.max_retries;
    backend["initial_backoff_ms"] = h.initial_backoff_ms;
  }
  Json dataset = {{"path", c.dataset_path.string()}};
  dataset["kind"] = c.dataset_kind
                        ? Json(std::string(DatasetKindName(*c.dataset_kind)))
                        : Json(nullptr);
  Json modes = Json::array();
  for (auto m : c.modes) modes.push_back(ExplanationModeName(m));
  Json strategies = Json::array();
  for (auto s : c.strategies) strategies.push_back(StrategyName(s));
  Json synonyms = {{"kind", c.synonyms.kind}};
  synonyms["path"] =
      c.synonyms.path.empty() ? Json(nullptr) : Json(c.synonyms.path.string());
  return {{"backend", std::move(backend)},
          {"model_name", c.model_name},
          {"paraphrase_model", c.paraphrase_model},
          {"max_tokens", c.max_tokens},
          {"dataset", std::move(dataset)},
          {"modes", std::move(modes)},
          {"strategies", std::move(strategies)},
          {"n_paraphrases", c.n_paraphrases},
          {"n_samples", c.n_samples},
          {"tau", c.tau},
          {"k", c.k},
          {"subset", c.subset},
          {"seed", c.seed},
          {"entailment", c.entailment},
          {"synonyms", std::move(synonyms)},
          {"faithfulness", c.faithfulness},
          {"budget", c.budget ? Json(*c.budget) : Json(nullptr)},
          {"concurrency", c.concurrency},
          {"output_dir", c.output_dir.string()},
          {"cache_path", CachePath(c).string()}};
}

std::string ResolvedEntailment(const RunConfig& config) {
  if (config.entailment != "auto") return config.entailment;
  return config.backend.kind == "http" ? "llm" : "overlap:0.6";
}

std::string ResolvedSynonyms(const RunConfig& config) {
  if (config.synonyms.kind != "auto") return config.synonyms.kind;
  return config.backend.kind == "http" ? "llm" : "wordlist";
}

std::string ConfigDigest(const RunConfig& config) {
  Json j = ConfigToJson(config);
  for (const char* key : {"output_dir", "cache_path", "budget", "concurrency"}) {
    j.erase(key);
  }
  // Content, not location, identifies the inputs.
  j["dataset"]["path"] = FileDigest(config.dataset_path);
  if (config.backend.kind == "mock") {
    j["backend"]["fixture"] = FileDigest(config.backend.fixture);
  }
  if (!config.synonyms.path.empty()) {
    j["synonyms"]["path"] = FileDigest(config.synonyms.path);
  }
  j["entailment"] = ResolvedEntailment(config);
  j["synonyms"]["kind"] = ResolvedSynonyms(config);
  return Sha256Hex(j.dump());
}

fs::path RunDirectory(const RunConfig& config) {
  return config.output_dir / ("run-" + ConfigDigest(config).substr(0, 16));
}

fs::path CachePath(const RunConfig& config) {
  if (!config.cache_path.empty()) return config.cache_path;
  return config.output_dir / "cache.jsonl";
}

}  // namespace nleu
