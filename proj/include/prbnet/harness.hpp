// Copyright 2026 The prbnet Authors
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

// Command implementations behind the `prbnet` executable. Each command reads
// a JSON config, writes CSV/JSON artifacts plus a manifest to an output
// directory and returns a process exit code.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace prbnet {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDivergence = 3;

inline constexpr std::string_view kVersion = "0.1.0";

struct CommandOptions {
  std::filesystem::path config;  // empty: defaults only
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = ".";
  std::ostream* log = nullptr;  // progress and diagnostics; nullptr = silent
};

int cmd_gen_data(const CommandOptions& opts);
int cmd_train(const CommandOptions& opts);
int cmd_eval(const CommandOptions& opts);
int cmd_bench(const CommandOptions& opts);
int cmd_shape(const CommandOptions& opts);

/// Dispatches by name ("gen-data", "train", "eval", "bench", "shape").
int run_command(std::string_view name, const CommandOptions& opts);

}  // namespace prbnet
