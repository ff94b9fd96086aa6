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

#ifndef NLEU_ERRORS_H_
#define NLEU_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace nleu {

// Every failure surfaced by the library is an `Error` carrying one of these
// codes. Callers branch on the code, never on the message text.
enum class ErrorCode {
  kInvalidArgument,
  kUnsupportedDatasetKind,
  // Gateway.
  kNetworkError,
  kBackendError,
  kBudgetExceeded,
  // Response parsing.
  kMissingFinalAnswer,
  kNoTokens,
  kNoSteps,
  kMalformedAnswer,
  kEmptyParaphraseSet,
  // Probing and scoring.
  kAllPerturbationsFailed,
  kJudgeUnparseable,
  kTargetNotFound,
  kDegenerateSample,
  // Pipeline.
  kConfigError,
  kDatasetError,
  kFormatError,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  // `context` holds the offending input (response line, config field, ...)
  // and may be empty.
  Error(ErrorCode code, const std::string& message, std::string context = {});

  ErrorCode code() const { return code_; }
  const std::string& context() const { return context_; }

 private:
  ErrorCode code_;
  std::string context_;
};

}  // namespace nleu

#endif  // NLEU_ERRORS_H_
