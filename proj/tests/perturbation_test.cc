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

#include "nleu/perturbation.h"

#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "nleu/agreement.h"
#include "nleu/errors.h"
#include "nleu/gateway.h"
#include "nleu/serialization.h"
#include "test_support.h"

namespace nleu {
namespace {

using testing::Fixture;
using testing::FunctionBackend;
using testing::QuestionOf;
using testing::ReadText;

const Question kSignatures{
    "sig", "How many signatures do the sisters need to collect to reach their goal?",
    DatasetKind::kMathWord, std::nullopt};

const char kTiResponse[] =
    "Word: signatures, Importance: 50%\nWord: sisters, Importance: 30%\n"
    "Word: goal, Importance: 20%\n"
    "Final answer and overall confidence (0-100): 40, 90%";

std::string SignatureListResponse() {
  const std::string fixture = ReadText(Fixture("paraphrase_mock.jsonl"));
  return nlohmann::json::parse(fixture.substr(0, fixture.find('\n')))
      ["responses"][0]
          .get<std::string>();
}

std::vector<std::string> SignatureParaphrases() {
  std::vector<std::string> lines;
  std::istringstream in(ReadText(Fixture("signature_paraphrases.txt")));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

bool IsParaphrasePrompt(const std::string& p) {
  return p.starts_with("Paraphrase the question");
}

ElicitationOptions Options() {
  ElicitationOptions o;
  o.model_name = "mock";
  return o;
}

struct Harness {
  explicit Harness(FunctionBackend::Handler h)
      : backend(std::make_shared<FunctionBackend>(std::move(h))),
        gateway(backend, std::make_shared<ResponseCache>()) {}
  std::shared_ptr<FunctionBackend> backend;
  ModelGateway gateway;
};

TEST(SampleProbe, SignatureParaphrases) {
  const std::string list = SignatureListResponse();
  Harness h([&](const CompletionRequest& r) {
    return IsParaphrasePrompt(r.prompt) ? list : std::string(kTiResponse);
  });
  const auto set = SampleProbe(h.gateway, kSignatures,
                               ExplanationMode::kTokenImportance, 10, Options());
  const auto expected = SignatureParaphrases();
  ASSERT_EQ(set.n_effective(), 10);
  EXPECT_EQ(set.requested_n, 10);
  EXPECT_EQ(set.original.provenance, Provenance::Original());
  EXPECT_EQ(set.original.question_text, kSignatures.text);
  for (int i = 0; i < 10; ++i) {
    const auto& r = set.perturbed[i];
    EXPECT_EQ(r.provenance, Provenance::Paraphrase(i + 1));
    EXPECT_EQ(r.question_text, expected[i]);
    EXPECT_EQ(QuestionOf(r.prompt_text), expected[i]);
    EXPECT_EQ(r.question_id, "sig");
  }
  EXPECT_TRUE(set.diagnostics.empty());
}

TEST(SampleProbe, SingleParaphrase) {
  const std::string list = SignatureListResponse();
  Harness h([&](const CompletionRequest& r) {
    return IsParaphrasePrompt(r.prompt) ? list : std::string(kTiResponse);
  });
  const auto set = SampleProbe(h.gateway, kSignatures,
                               ExplanationMode::kTokenImportance, 1, Options());
  ASSERT_EQ(set.n_effective(), 1);
  EXPECT_EQ(set.perturbed[0].question_text, SignatureParaphrases()[0]);
  EXPECT_THROW(SampleProbe(h.gateway, kSignatures,
                           ExplanationMode::kTokenImportance, 0, Options()),
               Error);
}

TEST(SampleProbe, AllParaphraseExplanationsMalformed) {
  const std::string list = SignatureListResponse();
  Harness h([&](const CompletionRequest& r) -> std::string {
    if (IsParaphrasePrompt(r.prompt)) return list;
    return QuestionOf(r.prompt) == kSignatures.text ? kTiResponse : "no idea";
  });
  try {
    SampleProbe(h.gateway, kSignatures, ExplanationMode::kTokenImportance, 4,
                Options());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllPerturbationsFailed);
  }
}

TEST(SampleProbe, DroppedParsesKeepContiguousIndices) {
  const std::string list = SignatureListResponse();
  const auto table = SignatureParaphrases();
  Harness h([&](const CompletionRequest& r) -> std::string {
    if (IsParaphrasePrompt(r.prompt)) return list;
    return QuestionOf(r.prompt) == table[1] ? "garbled" : kTiResponse;
  });
  const auto set = SampleProbe(h.gateway, kSignatures,
                               ExplanationMode::kTokenImportance, 3, Options());
  ASSERT_EQ(set.n_effective(), 2);
  EXPECT_EQ(set.perturbed[0].question_text, table[0]);
  EXPECT_EQ(set.perturbed[1].question_text, table[2]);
  EXPECT_EQ(set.perturbed[1].provenance, Provenance::Paraphrase(2));
  ASSERT_EQ(set.diagnostics.size(), 1u);
  EXPECT_EQ(set.diagnostics[0].code, "MissingFinalAnswer");
  EXPECT_EQ(set.diagnostics[0].provenance, "paraphrase:2");
}

TEST(CollectParaphrases, DistinctAndDifferentFromOriginal) {
  Harness h([&](const CompletionRequest& r) -> std::string {
    if (r.sample_index == 0) {
      return "[\"" + kSignatures.text + "\", \"Alpha?\", \"alpha?\", \"Beta?\"]";
    }
    return "[\"Beta\", \"Gamma?\", \"Delta?\"]";
  });
  std::vector<Diagnostic> diagnostics;
  const auto kept =
      CollectParaphrases(h.gateway, kSignatures, 3, Options(), &diagnostics);
  EXPECT_EQ(kept, (std::vector<std::string>{"Alpha?", "Beta?", "Gamma?"}));
  EXPECT_EQ(h.backend->prompts().size(), 2u);
  EXPECT_TRUE(diagnostics.empty());
}

TEST(CollectParaphrases, SeparateParaphraseModel) {
  std::vector<std::string> models;
  Harness h([&](const CompletionRequest& r) {
    models.push_back(r.params.model_name);
    return std::string("[\"Other?\"]");
  });
  ElicitationOptions options = Options();
  options.paraphrase_model = "rewriter";
  CollectParaphrases(h.gateway, kSignatures, 1, options);
  EXPECT_EQ(models, (std::vector<std::string>{"rewriter"}));
}

TEST(CollectParaphrases, ShortfallIsReported) {
  Harness h([](const CompletionRequest&) { return std::string("[\"Only one?\"]"); });
  std::vector<Diagnostic> diagnostics;
  const auto kept =
      CollectParaphrases(h.gateway, kSignatures, 5, Options(), &diagnostics);
  EXPECT_EQ(kept.size(), 1u);
  ASSERT_EQ(diagnostics.size(), 1u);
  EXPECT_EQ(diagnostics[0].code, "FewerParaphrases");
}

TEST(CollectParaphrases, NothingUsable) {
  Harness h([](const CompletionRequest&) { return std::string("   "); });
  try {
    CollectParaphrases(h.gateway, kSignatures, 5, Options());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyParaphraseSet);
  }
}

TEST(ModelProbe, FiveSamples) {
  Harness h([](const CompletionRequest& r) {
    return "Step 1: draw " + std::to_string(r.sample_index) +
           "\nFinal answer and overall confidence (0-100): 40, 80%";
  });
  const auto set = ModelProbe(h.gateway, kSignatures,
                              ExplanationMode::kChainOfThought, 5, 0.7, Options());
  ASSERT_EQ(set.n_effective(), 5);
  EXPECT_EQ(set.original.generation.temperature, 0.0);
  for (int i = 0; i < 5; ++i) {
    const auto& r = set.perturbed[i];
    EXPECT_EQ(r.provenance, Provenance::TemperatureSample(i + 1));
    EXPECT_EQ(r.generation.temperature, 0.7);
    EXPECT_EQ(r.prompt_text, set.original.prompt_text);
    EXPECT_EQ(std::get<CoTExplanation>(r.explanation).steps[0].text,
              "draw " + std::to_string(i + 1));
  }
}

TEST(ModelProbe, ZeroTemperatureDeterministicBackend) {
  Harness h([](const CompletionRequest&) { return std::string(kTiResponse); });
  const auto set = ModelProbe(h.gateway, kSignatures,
                              ExplanationMode::kTokenImportance, 4, 0.0, Options());
  for (const auto& r : set.perturbed) {
    EXPECT_EQ(r.explanation, set.original.explanation);
  }
  EXPECT_EQ(TokenImportanceUncertainty(set, 3).value(), 1.0);
}

TEST(ModelProbe, OneMalformedSample) {
  Harness h([](const CompletionRequest& r) -> std::string {
    return r.sample_index == 2 ? "Word: x, Importance: 10%" : kTiResponse;
  });
  const auto set = ModelProbe(h.gateway, kSignatures,
                              ExplanationMode::kTokenImportance, 3, 1.0, Options());
  ASSERT_EQ(set.n_effective(), 2);
  EXPECT_EQ(set.perturbed[1].provenance, Provenance::TemperatureSample(2));
  ASSERT_EQ(set.diagnostics.size(), 1u);
  EXPECT_EQ(set.diagnostics[0].provenance, "sample:2");
  EXPECT_EQ(set.diagnostics[0].code, "MissingFinalAnswer");
  EXPECT_THROW(ModelProbe(h.gateway, kSignatures,
                          ExplanationMode::kTokenImportance, 3, -1.0, Options()),
               Error);
}

TEST(ModelProbe, AllSamplesMalformed) {
  Harness h([](const CompletionRequest& r) -> std::string {
    return r.sample_index == 0 ? kTiResponse : "?";
  });
  try {
    ModelProbe(h.gateway, kSignatures, ExplanationMode::kTokenImportance, 3, 1.0,
               Options());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllPerturbationsFailed);
  }
}

TEST(ProbingSet, SerializationIsByteIdenticalAcrossRuns) {
  const std::string list = SignatureListResponse();
  auto run = [&] {
    Harness h([&](const CompletionRequest& r) {
      return IsParaphrasePrompt(r.prompt) ? list : std::string(kTiResponse);
    });
    return ProbingSetToJson(SampleProbe(h.gateway, kSignatures,
                                        ExplanationMode::kTokenImportance, 10,
                                        Options()))
        .dump(2);
  };
  const std::string first = run();
  EXPECT_EQ(first, run());
  EXPECT_EQ(ProbingSetToJson(ProbingSetFromJson(nlohmann::ordered_json::parse(first)))
                .dump(2),
            first);
}

}  // namespace
}  // namespace nleu
