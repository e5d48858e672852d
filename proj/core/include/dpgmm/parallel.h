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

#ifndef DPGMM_PARALLEL_H_
#define DPGMM_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace dpgmm {

// Worker count: DPGMM_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
int WorkerCount();

// Calls body(i) for every i in [0, n). Iterations may run concurrently; each
// must write only to its own output slot so results do not depend on
// scheduling.
void ParallelFor(size_t n, const std::function<void(size_t)>& body);

}  // namespace dpgmm

#endif  // DPGMM_PARALLEL_H_
