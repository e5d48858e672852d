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

// JSON forms of every artifact. Doubles are written in shortest round-trip
// form, so Parse(Serialize(x)) reproduces x bit for bit. Parse errors carry
// the JSON path of the offending field.

#ifndef DPGMM_SERIALIZATION_H_
#define DPGMM_SERIALIZATION_H_

#include <string>

#include "absl/status/statusor.h"
#include "dpgmm/adjacency.h"
#include "dpgmm/audit.h"
#include "dpgmm/divergence.h"
#include "dpgmm/model.h"
#include "dpgmm/noise_plan.h"
#include "dpgmm/planner.h"
#include "nlohmann/json.hpp"

namespace dpgmm {

using Json = nlohmann::ordered_json;

Json ModelToJson(const GmmParams& model);
absl::StatusOr<GmmParams> ModelFromJson(const Json& j);

Json PlanToJson(const NoisePlan& plan);
absl::StatusOr<NoisePlan> PlanFromJson(const Json& j);

Json ReleasedToJson(const ReleasedGmm& released);
absl::StatusOr<ReleasedGmm> ReleasedFromJson(const Json& j);

Json KlReportToJson(const KlReport& report);
Json LedgerToJson(const LedgerReport& report);
Json AuditToJson(const AuditReport& report);
Json AdjacencySummaryToJson(const AdjacencySet& adj);

// Two-space indented text with a trailing newline.
std::string DumpJson(const Json& j);
absl::StatusOr<Json> ParseJson(const std::string& text);

absl::StatusOr<Json> ReadJsonFile(const std::string& path);
absl::Status WriteTextFile(const std::string& path, const std::string& text);

}  // namespace dpgmm

#endif  // DPGMM_SERIALIZATION_H_
