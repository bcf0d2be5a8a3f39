// Copyright 2026 The Simground Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SIMGROUND_PARALLEL_H_
#define SIMGROUND_PARALLEL_H_

#include <functional>

namespace simground {

// Environment variable holding the worker thread count.
inline constexpr char kWorkersEnv[] = "SIMGROUND_WORKERS";

// Worker count from kWorkersEnv, at least 1. Defaults to 1.
int WorkerCount();

// Calls fn(i) for i in [0, n) on up to WorkerCount() threads. Callers write
// results into slot i, so output never depends on scheduling. The first
// exception thrown by any call is rethrown after all workers finish.
void ParallelFor(int n, const std::function<void(int)>& fn);

}  // namespace simground

#endif  // SIMGROUND_PARALLEL_H_
