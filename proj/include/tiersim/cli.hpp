/*
 * Copyright 2026 The TierSim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tiersim/metrics.hpp"
#include "tiersim/system.hpp"

namespace tiersim::cli {

enum ExitCode : int { kExitOk = 0, kExitFault = 1, kExitConfig = 2 };

/// A run configuration file plus the directory its relative paths resolve
/// against.
struct LoadedConfig {
  nlohmann::json json;
  std::filesystem::path base_dir;
};

/// Throws ConfigError when the file is missing or not valid JSON.
LoadedConfig load_config(const std::filesystem::path& path);

/// JSON literal when `text` parses as one, otherwise the text as a string.
nlohmann::json parse_value(std::string_view text);

/// Sets a dotted path. The first segment is looked up at the root, then
/// under "system". Every parent must exist; throws ConfigError otherwise.
void set_path(nlohmann::json& cfg, std::string_view dotted, nlohmann::json value);

/// Applies "a.b.c=v".
void apply_override(nlohmann::json& cfg, std::string_view assignment);

struct Prepared {
  arch::SystemSpec spec;
  arch::Workload workload;
  std::uint64_t seed = 1;
  arch::RunOptions options;
};

/// Every problem with the configuration, system and workload alike.
std::vector<arch::Violation> check_config(const nlohmann::json& cfg, const std::filesystem::path& base_dir);

/// Throws ConfigError listing every violation, one per line.
Prepared prepare(const nlohmann::json& cfg, const std::filesystem::path& base_dir);

/// Builds and runs one simulation; the report echoes `cfg`.
metrics::Report simulate(const nlohmann::json& cfg, const std::filesystem::path& base_dir);

/// Sweep worker count: TIERSIM_THREADS when set and positive, else the
/// hardware concurrency, never more than `jobs`.
unsigned sweep_threads(std::size_t jobs);

/// Entry point of the `tiersim` tool.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace tiersim::cli
