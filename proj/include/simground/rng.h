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

// Seeded random streams. Every draw is computed from raw 64-bit engine
// output so results do not depend on the standard library's distributions.

#ifndef SIMGROUND_RNG_H_
#define SIMGROUND_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace simground {

using Rng = std::mt19937_64;

// Independent stream for component `name` under a root seed.
Rng Substream(std::uint64_t seed, std::string_view name);

// Uniform on [0, 1) with 53 random bits.
double UniformUnit(Rng& rng);
double UniformReal(Rng& rng, double lo, double hi);
// Uniform integer in [0, n). Requires n > 0.
int UniformIndex(Rng& rng, int n);
// Box-Muller standard normal; uses two uniforms per call.
double StandardNormal(Rng& rng);

}  // namespace simground

#endif  // SIMGROUND_RNG_H_
