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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tiersim/memtech.hpp"
#include "tiersim/types.hpp"

namespace tiersim::metrics {

struct LatencySummary {
  std::size_t count = 0;
  double mean = 0.0;
  Picoseconds p95 = 0;
  Picoseconds max = 0;
  Picoseconds bucket_width = 1000;
  /// (bucket start, count) for every non-empty bucket, ascending.
  std::vector<std::pair<Picoseconds, std::uint64_t>> histogram;
};

/// Mean, nearest-rank p95 (the ceil(0.95 n)-th order statistic), max and
/// histogram. nullopt for an empty sample set.
std::optional<LatencySummary> summarize_latency(std::span<const Picoseconds> samples,
                                                Picoseconds bucket_width = 1000);

/// (energy / duration) / area in mW per SRAM-equivalent MiB. Throws
/// std::domain_error for non-positive duration or area.
double tier_power_density(double energy_nj, double duration_ns, double area_units);

struct RegionReport {
  std::string technology;
  std::uint32_t first_way = 0;
  std::uint32_t end_way = 0;
  double capacity_mib = 0.0;
  memtech::AccessCounters counters;
  double energy_nj = 0.0;
  double area = 0.0;
};

struct EnduranceSummary {
  std::uint64_t max_write_count = 0;
  std::uint64_t worn_blocks = 0;
  std::uint64_t wear_events = 0;
  std::optional<Picoseconds> first_wear_time;
  std::optional<Address> first_wear_block;
  std::optional<std::uint64_t> first_wear_write_count;

  void merge(const EnduranceSummary& other);
};

struct LevelReport {
  std::string name;
  std::string sharing;
  std::uint32_t instances = 0;
  std::uint64_t capacity_bytes = 0;
  memtech::AccessCounters counters;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t fills = 0;
  std::uint64_t evictions = 0;
  std::uint64_t writebacks = 0;
  std::optional<double> mean_hit_latency_ps;
  double energy_nj = 0.0;
  double area = 0.0;
  std::vector<RegionReport> regions;
  EnduranceSummary endurance;
};

struct TierReport {
  std::size_t index = 0;
  std::string kind;
  std::vector<std::uint32_t> clusters;
  std::vector<std::string> levels;
  double area = 0.0;
  double energy_nj = 0.0;
  std::optional<double> power_density_mw_per_unit;
};

struct BusReport {
  std::uint64_t transactions = 0;
  std::uint64_t request_grants = 0;
  std::uint64_t snoop_grants = 0;
  std::uint64_t response_grants = 0;
  std::uint64_t writebacks = 0;
  std::uint64_t invalidations = 0;
  std::uint64_t cache_to_cache = 0;
  std::uint64_t l1_misses = 0;
  std::optional<double> transactions_per_l1_miss;
};

struct NocReport {
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t in_flight = 0;
  std::optional<double> mean_hops;
};

struct LatencySample {
  std::string traffic_class;
  Picoseconds t_inject = 0;
  Picoseconds t_complete = 0;
};

struct Report {
  nlohmann::ordered_json config;
  std::uint64_t seed = 0;
  Picoseconds duration_ps = 0;
  std::uint64_t events_dispatched = 0;
  std::vector<LevelReport> levels;
  double total_energy_nj = 0.0;
  std::map<std::string, std::optional<LatencySummary>> latency;
  BusReport bus;
  NocReport noc;
  EnduranceSummary endurance;
  std::vector<TierReport> tiers;
  std::vector<std::string> notes;
  std::vector<LatencySample> samples;
};

nlohmann::ordered_json to_json(const Report& report, const std::string& timestamp);

/// UTC, ISO 8601.
std::string current_timestamp();

/// Writes the report as JSON with stable key order. Throws
/// std::runtime_error when the file cannot be written.
void emit_report(const Report& report, const std::filesystem::path& path);

/// CSV `class,t_inject_ps,t_complete_ps`, one row per sample.
void dump_latencies(const Report& report, const std::filesystem::path& path);

}  // namespace tiersim::metrics
