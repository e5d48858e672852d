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

#ifndef DPGMM_STATUS_H_
#define DPGMM_STATUS_H_

#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace dpgmm {

// Domain-level error kinds. Each is carried on an absl::Status as a payload so
// callers can branch on the kind without parsing messages.
enum class ErrorCode {
  kNone = 0,
  kNotPositiveDefinite,
  kDomainError,
  kParseError,
  kEmptyClass,
  kLabelOutOfRange,
  kDegenerateClass,
  kClipViolation,
  kInfeasibleBudget,
  kDegenerateAdjacency,
  kNumericalFailure,
  kInvalidArgument,
  kSchemaMismatch,
  kIoError,
};

absl::string_view ErrorCodeName(ErrorCode code);

// Builds a status whose message is prefixed by the error kind name, e.g.
// "NotPositiveDefinite: pivot 2 is -1".
absl::Status MakeError(ErrorCode code, absl::string_view message);

// Returns kNone for OK statuses and for statuses not created by MakeError.
ErrorCode ErrorCodeOf(const absl::Status& status);

template <typename T>
ErrorCode ErrorCodeOf(const absl::StatusOr<T>& status_or) {
  return ErrorCodeOf(status_or.status());
}

}  // namespace dpgmm

#define DPGMM_STATUS_CONCAT_INNER_(a, b) a##b
#define DPGMM_STATUS_CONCAT_(a, b) DPGMM_STATUS_CONCAT_INNER_(a, b)

#define DPGMM_RETURN_IF_ERROR(expr)          \
  do {                                       \
    ::absl::Status dpgmm_status_ = (expr);   \
    if (!dpgmm_status_.ok()) {               \
      return dpgmm_status_;                  \
    }                                        \
  } while (0)

#define DPGMM_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, rexpr) \
  auto tmp = (rexpr);                                 \
  if (!tmp.ok()) {                                    \
    return tmp.status();                              \
  }                                                   \
  lhs = std::move(tmp).value()

#define DPGMM_ASSIGN_OR_RETURN(lhs, rexpr) \
  DPGMM_ASSIGN_OR_RETURN_IMPL_(            \
      DPGMM_STATUS_CONCAT_(dpgmm_statusor_, __LINE__), lhs, rexpr)

#endif  // DPGMM_STATUS_H_
