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

#include "nleu/errors.h"

#include <utility>

namespace nleu {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kUnsupportedDatasetKind:
      return "UnsupportedDatasetKind";
    case ErrorCode::kNetworkError:
      return "NetworkError";
    case ErrorCode::kBackendError:
      return "BackendError";
    case ErrorCode::kBudgetExceeded:
      return "BudgetExceeded";
    case ErrorCode::kMissingFinalAnswer:
      return "MissingFinalAnswer";
    case ErrorCode::kNoTokens:
      return "NoTokens";
    case ErrorCode::kNoSteps:
      return "NoSteps";
    case ErrorCode::kMalformedAnswer:
      return "MalformedAnswer";
    case ErrorCode::kEmptyParaphraseSet:
      return "EmptyParaphraseSet";
    case ErrorCode::kAllPerturbationsFailed:
      return "AllPerturbationsFailed";
    case ErrorCode::kJudgeUnparseable:
      return "JudgeUnparseable";
    case ErrorCode::kTargetNotFound:
      return "TargetNotFound";
    case ErrorCode::kDegenerateSample:
      return "DegenerateSample";
    case ErrorCode::kConfigError:
      return "ConfigError";
    case ErrorCode::kDatasetError:
      return "DatasetError";
    case ErrorCode::kFormatError:
      return "FormatError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string context)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code),
      context_(std::move(context)) {}

}  // namespace nleu
