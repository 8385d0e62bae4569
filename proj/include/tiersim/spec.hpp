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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tiersim/cache.hpp"
#include "tiersim/interconnect.hpp"
#include "tiersim/memtech.hpp"

namespace tiersim::arch {

enum class L2Sharing { kShared, kPrivate };

/// Geometry plus technology of one cache level. When the geometry has no
/// regions the whole level is built from `technology`.
struct LevelConfig {
  cache::CacheGeometry geometry;
  std::string technology = "SRAM";
};

enum class TierKind { kCoresL1, kL2SplitId, kL3Unified, kMemory };

std::string_view tier_kind_name(TierKind kind);

struct TierSpec {
  TierKind kind = TierKind::kCoresL1;
  /// Owning clusters; empty means every cluster.
  std::vector<std::uint32_t> clusters;
};

struct Clocks {
  Picoseconds core = 1000;
  Picoseconds bus = 1000;
  Picoseconds noc = 1000;
};

/// A full architecture: coherent clusters (one bus and one memory
/// controller each), the inter-cluster mesh, and the tier stack.
struct SystemSpec {
  std::string name = "custom";
  std::uint32_t grid_x = 1;
  std::uint32_t grid_y = 1;
  std::uint32_t cores_per_cluster = 8;
  std::vector<TierSpec> tier_stack{TierSpec{}};
  interconnect::MeshTopology noc;
  LevelConfig l1i;
  LevelConfig l1d;
  LevelConfig l2;
  std::optional<LevelConfig> l3;
  L2Sharing l2_sharing = L2Sharing::kShared;
  double memory_latency_ns = 50.0;
  Clocks clocks;
  std::uint32_t bus_beat_width = 16;
  double write_mix = memtech::kDefaultWriteMix;
  memtech::Catalog technologies = memtech::catalog_default();

  /// Clusters sit on the mesh nodes; the mesh z extent stacks cluster layers.
  std::uint32_t clusters() const { return grid_x * grid_y * noc.dims.z; }
  std::uint32_t cores() const { return clusters() * cores_per_cluster; }

  /// Tier index hosting `kind` for `cluster`, if any.
  std::optional<std::size_t> tier_of(TierKind kind, std::uint32_t cluster) const;
  bool tier_owns(const TierSpec& tier, std::uint32_t cluster) const;
  /// The L2 is split into instruction and data halves when it sits on an
  /// l2_split_id tier.
  bool l2_split(std::uint32_t cluster) const { return tier_of(TierKind::kL2SplitId, cluster).has_value(); }
};

struct Violation {
  std::string path;
  std::string message;

  std::string to_string() const { return path + ": " + message; }
};

/// Reads a `system` JSON object. Throws ConfigError on type errors; unknown
/// keys and semantic problems are left to validate_spec via `unknown_keys`.
SystemSpec parse_system(const nlohmann::json& j, std::vector<Violation>* unknown_keys = nullptr);

/// Every violation with a location path; empty means valid.
std::vector<Violation> validate_spec(const SystemSpec& spec);

/// Named architecture presets:
/// fig32, fig33, fig34, fig35a, fig35b, fig36. Returns the `system` JSON.
nlohmann::json preset_system(std::string_view name);
std::vector<std::string> preset_names();

/// Full run configuration (system + synthetic workload) for a preset.
nlohmann::json preset_run_config(std::string_view name);

}  // namespace tiersim::arch
