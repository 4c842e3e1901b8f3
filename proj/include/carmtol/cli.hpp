// Copyright 2026 The carmtol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace carmtol {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Command-line entry point. `args` includes the program name.
///
///   simulate <config> [--threads N] [--csv PATH] [--json PATH]
///   sample   <config> [--out PATH]
///   trial    <config> --focal PX --pp PX --seed S
///   figure   <report.csv> --pp PX [--metric recon|reproj_ap|reproj_lat]
///
/// Returns 0 on success, 1 on usage or validation errors, 2 on runtime failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace carmtol
