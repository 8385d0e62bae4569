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

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tiersim::memtech {

/// Endurance values at or above 1e16 writes are stored as this sentinel.
inline constexpr std::uint64_t kUnlimitedEndurance = std::numeric_limits<std::uint64_t>::max();
inline constexpr double kUnlimitedEnduranceThreshold = 1e16;

/// Latency, energy, standby, endurance and density of one memory technology.
struct TechnologyParams {
  std::string name;
  double read_latency_ns = 1.0;
  double write_set_latency_ns = 1.0;
  double write_reset_latency_ns = 1.0;
  double read_energy_nj = 0.0;
  double write_set_energy_nj = 0.0;
  double write_reset_energy_nj = 0.0;
  double standby_power_mw_per_mib = 0.0;
  std::uint64_t endurance = kUnlimitedEndurance;
  double norm_density = 1.0;
  bool non_volatile = false;

  bool unlimited_endurance() const { return endurance == kUnlimitedEndurance; }

  /// Every broken invariant, one message each; empty when valid.
  std::vector<std::string> violations() const;
};

using Catalog = std::map<std::string, TechnologyParams, std::less<>>;

/// SRAM, DRAM, eDRAM, PCRAM, MRAM and DWM at the midpoints of their
/// published ranges.
Catalog catalog_default();

/// Looks a technology up by name; throws std::out_of_range if absent.
const TechnologyParams& lookup(const Catalog& catalog, std::string_view name);

enum class AccessKind { kRead, kWriteSet, kWriteReset };

struct AccessCost {
  double latency_ns;
  double energy_nj;
};

AccessCost access_cost(const TechnologyParams& params, AccessKind kind);

/// Expected write latency/energy when a fraction write_mix of writes are
/// SET operations and the rest RESET.
double mixed_write_latency_ns(const TechnologyParams& params, double write_mix);
double mixed_write_energy_nj(const TechnologyParams& params, double write_mix);

inline constexpr double kDefaultWriteMix = 0.5;

struct AccessCounters {
  std::uint64_t n_read = 0;
  std::uint64_t n_write = 0;
  double busy_time_ns = 0.0;
  double idle_time_ns = 0.0;

  AccessCounters& operator+=(const AccessCounters& other);
};

/// Total energy (nJ) of one cache level: dynamic read and write energy plus
/// standby power integrated over idle time. 1 mW * 1 ns = 1e-3 nJ.
double level_energy(const AccessCounters& counters, const TechnologyParams& params,
                    double capacity_mib, double write_mix = kDefaultWriteMix);

/// SRAM-equivalent silicon area of capacity_mib of the given technology.
double area_estimate(double capacity_mib, const TechnologyParams& params);

// --- technology advisor --------------------------------------------------

enum class CacheTier { kL1 = 0, kL2 = 1, kL3 = 2 };

/// Throws std::out_of_range for anything but "L1", "L2", "L3".
CacheTier parse_cache_tier(std::string_view level);

enum Criterion : std::size_t {
  kDynamicEnergy = 0,
  kStandbyPower,
  kHeatInUse,
  kHeatStandby,
  kLatency,
  kEndurance,
  kCriterionCount
};

/// Ratings are stored as (dynamic energy, standby, latency, endurance).
using Rating = std::array<int, 4>;
using Weights = std::array<int, kCriterionCount>;

struct ScoringMatrix {
  std::array<Weights, 3> weights{};
  std::map<std::string, Rating, std::less<>> ratings;

  /// Weights follow the per-level importance table (severe=3, moderate=2,
  /// low=1); ratings are a coarse 0..2 reading of the catalog.
  static ScoringMatrix defaults();

  std::vector<std::string> violations() const;
};

/// Sum over the six criteria of weight x rating. Heat in use reuses the
/// dynamic-energy rating and heat in standby reuses the standby rating.
/// Throws std::out_of_range for an unknown technology.
int score_technology(std::string_view tech, CacheTier level, const ScoringMatrix& matrix);
int score_technology(std::string_view tech, std::string_view level, const ScoringMatrix& matrix);

}  // namespace tiersim::memtech
