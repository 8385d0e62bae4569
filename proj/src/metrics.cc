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

#include "tiersim/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace tiersim::metrics {

using nlohmann::ordered_json;

std::optional<LatencySummary> summarize_latency(std::span<const Picoseconds> samples, Picoseconds bucket_width) {
  if (samples.empty()) return std::nullopt;
  if (bucket_width == 0) throw std::domain_error("bucket width must be > 0");
  std::vector<Picoseconds> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  LatencySummary s;
  s.count = sorted.size();
  long double sum = 0;
  for (Picoseconds v : sorted) sum += v;
  s.mean = static_cast<double>(sum / static_cast<long double>(s.count));
  // ceil(0.95 n) computed in integers: (95 n + 99) / 100.
  const std::size_t rank = (95 * s.count + 99) / 100;
  s.p95 = sorted[std::max<std::size_t>(rank, 1) - 1];
  s.max = sorted.back();
  s.bucket_width = bucket_width;
  for (Picoseconds v : sorted) {
    const Picoseconds start = v - v % bucket_width;
    if (s.histogram.empty() || s.histogram.back().first != start)
      s.histogram.emplace_back(start, 1);
    else
      ++s.histogram.back().second;
  }
  return s;
}

double tier_power_density(double energy_nj, double duration_ns, double area_units) {
  if (!(duration_ns > 0.0)) throw std::domain_error("duration must be > 0");
  if (!(area_units > 0.0)) throw std::domain_error("area must be > 0");
  // nJ / ns = W.
  return energy_nj / duration_ns * 1000.0 / area_units;
}

void EnduranceSummary::merge(const EnduranceSummary& other) {
  max_write_count = std::max(max_write_count, other.max_write_count);
  worn_blocks += other.worn_blocks;
  wear_events += other.wear_events;
  if (other.first_wear_time && (!first_wear_time || *other.first_wear_time < *first_wear_time)) {
    first_wear_time = other.first_wear_time;
    first_wear_block = other.first_wear_block;
    first_wear_write_count = other.first_wear_write_count;
  }
}

namespace {

template <typename T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json counters_json(const memtech::AccessCounters& c) {
  ordered_json j;
  j["n_read"] = c.n_read;
  j["n_write"] = c.n_write;
  j["busy_time_ns"] = c.busy_time_ns;
  j["idle_time_ns"] = c.idle_time_ns;
  return j;
}

ordered_json endurance_json(const EnduranceSummary& e) {
  ordered_json j;
  j["max_write_count"] = e.max_write_count;
  j["worn_blocks"] = e.worn_blocks;
  j["wear_events"] = e.wear_events;
  j["first_wear_time_ps"] = optional_json(e.first_wear_time);
  j["first_wear_block"] = optional_json(e.first_wear_block);
  j["first_wear_write_count"] = optional_json(e.first_wear_write_count);
  return j;
}

ordered_json latency_json(const std::optional<LatencySummary>& s) {
  ordered_json j;
  if (!s) {
    j["count"] = 0;
    j["mean_ps"] = nullptr;
    j["p95_ps"] = nullptr;
    j["max_ps"] = nullptr;
    j["histogram"] = nullptr;
    return j;
  }
  j["count"] = s->count;
  j["mean_ps"] = s->mean;
  j["p95_ps"] = s->p95;
  j["max_ps"] = s->max;
  ordered_json h;
  h["bucket_width_ps"] = s->bucket_width;
  ordered_json buckets = ordered_json::array();
  for (const auto& [start, n] : s->histogram) buckets.push_back({start, n});
  h["buckets"] = std::move(buckets);
  j["histogram"] = std::move(h);
  return j;
}

}  // namespace

ordered_json to_json(const Report& r, const std::string& timestamp) {
  ordered_json j;
  j["meta"] = {{"tool", "tiersim"}, {"format_version", 1}, {"timestamp", timestamp}};
  j["seed"] = r.seed;
  j["duration_ps"] = r.duration_ps;
  j["events_dispatched"] = r.events_dispatched;

  ordered_json levels = ordered_json::array();
  for (const LevelReport& l : r.levels) {
    ordered_json lj;
    lj["name"] = l.name;
    lj["sharing"] = l.sharing;
    lj["instances"] = l.instances;
    lj["capacity_bytes"] = l.capacity_bytes;
    lj["counters"] = counters_json(l.counters);
    lj["hits"] = l.hits;
    lj["misses"] = l.misses;
    lj["fills"] = l.fills;
    lj["evictions"] = l.evictions;
    lj["writebacks"] = l.writebacks;
    lj["mean_hit_latency_ps"] = optional_json(l.mean_hit_latency_ps);
    lj["energy_nj"] = l.energy_nj;
    lj["area"] = l.area;
    ordered_json regions = ordered_json::array();
    for (const RegionReport& g : l.regions) {
      ordered_json gj;
      gj["technology"] = g.technology;
      gj["ways"] = {g.first_way, g.end_way};
      gj["capacity_mib"] = g.capacity_mib;
      gj["counters"] = counters_json(g.counters);
      gj["energy_nj"] = g.energy_nj;
      gj["area"] = g.area;
      regions.push_back(std::move(gj));
    }
    lj["regions"] = std::move(regions);
    lj["endurance"] = endurance_json(l.endurance);
    levels.push_back(std::move(lj));
  }
  j["levels"] = std::move(levels);

  ordered_json energy;
  energy["total_nj"] = r.total_energy_nj;
  ordered_json per_level;
  for (const LevelReport& l : r.levels) per_level[l.name] = l.energy_nj;
  energy["per_level_nj"] = std::move(per_level);
  j["energy"] = std::move(energy);

  ordered_json latency;
  for (const auto& [name, summary] : r.latency) latency[name] = latency_json(summary);
  j["latency"] = std::move(latency);

  ordered_json bus;
  bus["transactions"] = r.bus.transactions;
  bus["request_grants"] = r.bus.request_grants;
  bus["snoop_grants"] = r.bus.snoop_grants;
  bus["response_grants"] = r.bus.response_grants;
  bus["writebacks"] = r.bus.writebacks;
  bus["invalidations"] = r.bus.invalidations;
  bus["cache_to_cache"] = r.bus.cache_to_cache;
  bus["l1_misses"] = r.bus.l1_misses;
  bus["transactions_per_l1_miss"] = optional_json(r.bus.transactions_per_l1_miss);
  ordered_json noc;
  noc["injected"] = r.noc.injected;
  noc["delivered"] = r.noc.delivered;
  noc["in_flight"] = r.noc.in_flight;
  noc["mean_hops"] = optional_json(r.noc.mean_hops);
  j["interconnect"] = {{"bus", std::move(bus)}, {"noc", std::move(noc)}};

  j["endurance"] = endurance_json(r.endurance);

  ordered_json tiers = ordered_json::array();
  for (const TierReport& t : r.tiers) {
    ordered_json tj;
    tj["index"] = t.index;
    tj["kind"] = t.kind;
    tj["clusters"] = t.clusters;
    tj["levels"] = t.levels;
    tj["area"] = t.area;
    tj["energy_nj"] = t.energy_nj;
    tj["power_density_mw_per_unit"] = optional_json(t.power_density_mw_per_unit);
    tiers.push_back(std::move(tj));
  }
  j["tiers"] = std::move(tiers);
  j["notes"] = r.notes;
  j["config"] = r.config;
  return j;
}

std::string current_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit_report(const Report& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report to '" + path.string() + "'");
  out << to_json(report, current_timestamp()).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing report to '" + path.string() + "'");
}

void dump_latencies(const Report& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write latency dump to '" + path.string() + "'");
  out << "class,t_inject_ps,t_complete_ps\n";
  for (const LatencySample& s : report.samples)
    out << s.traffic_class << ',' << s.t_inject << ',' << s.t_complete << '\n';
}

}  // namespace tiersim::metrics
