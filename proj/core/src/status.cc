// Copyright 2026 The dpgmm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpgmm/status.h"

#include <array>
#include <string>

#include "absl/strings/cord.h"
#include "absl/strings/str_cat.h"

namespace dpgmm {
namespace {

constexpr char kPayloadUrl[] = "type.dpgmm/error_code";

constexpr std::array<absl::string_view, 14> kNames = {
    "Ok",
    "NotPositiveDefinite",
    "DomainError",
    "ParseError",
    "EmptyClass",
    "LabelOutOfRange",
    "DegenerateClass",
    "ClipViolation",
    "InfeasibleBudget",
    "DegenerateAdjacency",
    "NumericalFailure",
    "InvalidArgument",
    "SchemaMismatch",
    "IoError",
};

absl::StatusCode CanonicalCode(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNone:
      return absl::StatusCode::kOk;
    case ErrorCode::kParseError:
    case ErrorCode::kLabelOutOfRange:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kSchemaMismatch:
    case ErrorCode::kDomainError:
      return absl::StatusCode::kInvalidArgument;
    case ErrorCode::kNumericalFailure:
      return absl::StatusCode::kInternal;
    case ErrorCode::kIoError:
      return absl::StatusCode::kNotFound;
    default:
      return absl::StatusCode::kFailedPrecondition;
  }
}

}  // namespace

absl::string_view ErrorCodeName(ErrorCode code) {
  return kNames[static_cast<size_t>(code)];
}

absl::Status MakeError(ErrorCode code, absl::string_view message) {
  absl::Status status(CanonicalCode(code),
                      absl::StrCat(ErrorCodeName(code), ": ", message));
  status.SetPayload(kPayloadUrl,
                    absl::Cord(std::to_string(static_cast<int>(code))));
  return status;
}

ErrorCode ErrorCodeOf(const absl::Status& status) {
  if (status.ok()) return ErrorCode::kNone;
  auto payload = status.GetPayload(kPayloadUrl);
  if (!payload.has_value()) return ErrorCode::kNone;
  const int value = std::stoi(std::string(*payload));
  if (value < 0 || value >= static_cast<int>(kNames.size())) {
    return ErrorCode::kNone;
  }
  return static_cast<ErrorCode>(value);
}

}  // namespace dpgmm
