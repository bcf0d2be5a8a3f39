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

// Text serialization of trajectories and small file helpers.

#ifndef SIMGROUND_IO_H_
#define SIMGROUND_IO_H_

#include <string>

#include "simground/physics.h"

namespace simground {

// One JSON line per (frame, dynamic body) with step, body_role, x, y, vx,
// vy, angle and omega, then a summary line. Reals use 9 significant digits.
std::string TrajectoryDump(const Trajectory& traj);

// Reads frames and counters back from TrajectoryDump output. The contact
// log is not part of the dump. Throws std::invalid_argument.
Trajectory ParseTrajectoryDump(const std::string& text);

std::string ReadFile(const std::string& path);
// Refuses to replace an existing file unless `force` is set; throws
// std::runtime_error.
void WriteFile(const std::string& path, const std::string& content,
               bool force);

}  // namespace simground

#endif  // SIMGROUND_IO_H_
