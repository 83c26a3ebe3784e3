// Copyright 2026 The d4curate Authors.
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

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace d4::cli {

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;  // also usage errors
inline constexpr int kExitIo = 2;          // I/O and file-format errors

/// Runs one subcommand: synth | minhash | embed | cluster | select |
/// diagnose | overlap | nn | schedule | cost. args excludes the program
/// name. Every subcommand with --out writes config.json, the fully resolved
/// option set (minus --threads, which never changes outputs).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace d4::cli
