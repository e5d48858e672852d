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

#ifndef DPGMM_TOOLS_CLI_H_
#define DPGMM_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace dpgmm::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitUsageError = 2;
inline constexpr int kExitAuditFailed = 3;

// Runs one invocation. args[0] is the program name. Diagnostics go to err;
// short progress lines go to out.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace dpgmm::cli

#endif  // DPGMM_TOOLS_CLI_H_
