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

#include "tiersim/memtech.hpp"

#include <cmath>
#include <stdexcept>

namespace tiersim::memtech {

namespace {

constexpr double midpoint(double lo, double hi) { return (lo + hi) / 2.0; }

TechnologyParams make(std::string name, double read_ns, double set_ns, double reset_ns,
                      double read_nj, double set_nj, double reset_nj, double standby,
                      std::uint64_t endurance, double density, bool non_volatile) {
  TechnologyParams p;
  p.name = std::move(name);
  p.read_latency_ns = read_ns;
  p.write_set_latency_ns = set_ns;
  p.write_reset_latency_ns = reset_ns;
  p.read_energy_nj = read_nj;
  p.write_set_energy_nj = set_nj;
  p.write_reset_energy_nj = reset_nj;
  p.standby_power_mw_per_mib = standby;
  p.endurance = endurance;
  p.norm_density = density;
  p.non_volatile = non_volatile;
  return p;
}

}  // namespace

std::vector<std::string> TechnologyParams::violations() const {
  std::vector<std::string> out;
  auto positive = [&](double v, const char* field) {
    if (!(v > 0.0)) out.push_back(std::string(field) + " must be > 0");
  };
  auto non_negative = [&](double v, const char* field) {
    if (!(v >= 0.0)) out.push_back(std::string(field) + " must be >= 0");
  };
  positive(read_latency_ns, "read_latency");
  positive(write_set_latency_ns, "write_set_latency");
  positive(write_reset_latency_ns, "write_reset_latency");
  non_negative(read_energy_nj, "read_energy");
  non_negative(write_set_energy_nj, "write_set_energy");
  non_negative(write_reset_energy_nj, "write_reset_energy");
  non_negative(standby_power_mw_per_mib, "standby_power_per_mib");
  if (endurance < 1) out.emplace_back("endurance must be >= 1");
  positive(norm_density, "norm_density");
  if (non_volatile && standby_power_mw_per_mib != 0.0)
    out.emplace_back("non-volatile technology must have zero standby power");
  return out;
}

Catalog catalog_default() {
  // Midpoints of the published ranges. Volatile standby power is not given
  // numerically and is a configurable default (mW per MiB).
  Catalog c;
  auto add = [&](TechnologyParams p) { c.emplace(p.name, std::move(p)); };
  add(make("SRAM", midpoint(2, 4), midpoint(2, 4), midpoint(2, 4), midpoint(0.10, 0.80),
           midpoint(0.10, 1.4), midpoint(0.10, 1.4), 1.0, kUnlimitedEndurance, 1.0, false));
  add(make("DRAM", midpoint(2, 6), midpoint(2, 6), midpoint(2, 6), midpoint(0.60, 0.80),
           midpoint(0.60, 0.80), midpoint(0.60, 0.80), 1.5, kUnlimitedEndurance, 4.0, false));
  add(make("eDRAM", midpoint(2, 6), midpoint(2, 6), midpoint(2, 6), midpoint(0.50, 0.70),
           midpoint(0.50, 0.70), midpoint(0.50, 0.70), 1.5, kUnlimitedEndurance, 4.0, false));
  add(make("PCRAM", midpoint(2, 6), midpoint(100, 110), midpoint(40, 46), midpoint(0.10, 0.70),
           midpoint(2, 6), midpoint(6, 13), 0.0, 100'000'000ULL, 16.0, true));
  add(make("MRAM", midpoint(1, 2), midpoint(2, 5), midpoint(2, 5), midpoint(0.06, 0.20),
           midpoint(0.10, 0.60), midpoint(0.10, 0.60), 0.0, 1'000'000'000'000ULL, 4.0, true));
  add(make("DWM", midpoint(1, 3), midpoint(3, 4), midpoint(3, 4), midpoint(0.08, 0.60),
           midpoint(0.10, 0.80), midpoint(0.10, 0.80), 0.0, kUnlimitedEndurance, 6.0, true));
  return c;
}

const TechnologyParams& lookup(const Catalog& catalog, std::string_view name) {
  auto it = catalog.find(name);
  if (it == catalog.end()) throw std::out_of_range("unknown technology '" + std::string(name) + "'");
  return it->second;
}

AccessCost access_cost(const TechnologyParams& params, AccessKind kind) {
  switch (kind) {
    case AccessKind::kRead:
      return {params.read_latency_ns, params.read_energy_nj};
    case AccessKind::kWriteSet:
      return {params.write_set_latency_ns, params.write_set_energy_nj};
    case AccessKind::kWriteReset:
      return {params.write_reset_latency_ns, params.write_reset_energy_nj};
  }
  throw std::logic_error("bad access kind");
}

double mixed_write_latency_ns(const TechnologyParams& params, double write_mix) {
  return write_mix * params.write_set_latency_ns + (1.0 - write_mix) * params.write_reset_latency_ns;
}

double mixed_write_energy_nj(const TechnologyParams& params, double write_mix) {
  return write_mix * params.write_set_energy_nj + (1.0 - write_mix) * params.write_reset_energy_nj;
}

AccessCounters& AccessCounters::operator+=(const AccessCounters& other) {
  n_read += other.n_read;
  n_write += other.n_write;
  busy_time_ns += other.busy_time_ns;
  idle_time_ns += other.idle_time_ns;
  return *this;
}

double level_energy(const AccessCounters& counters, const TechnologyParams& params,
                    double capacity_mib, double write_mix) {
  if (write_mix < 0.0 || write_mix > 1.0) throw std::domain_error("write_mix outside [0, 1]");
  const double dynamic = static_cast<double>(counters.n_read) * params.read_energy_nj +
                         static_cast<double>(counters.n_write) * mixed_write_energy_nj(params, write_mix);
  const double standby = counters.idle_time_ns * params.standby_power_mw_per_mib * capacity_mib * 1e-3;
  return dynamic + standby;
}

double area_estimate(double capacity_mib, const TechnologyParams& params) {
  if (!(capacity_mib > 0.0)) throw std::domain_error("capacity must be > 0");
  return capacity_mib / params.norm_density;
}

CacheTier parse_cache_tier(std::string_view level) {
  if (level == "L1") return CacheTier::kL1;
  if (level == "L2") return CacheTier::kL2;
  if (level == "L3") return CacheTier::kL3;
  throw std::out_of_range("unknown cache level '" + std::string(level) + "'");
}

ScoringMatrix ScoringMatrix::defaults() {
  ScoringMatrix m;
  m.weights[0] = {3, 2, 3, 2, 3, 3};
  m.weights[1] = {2, 2, 2, 1, 2, 2};
  m.weights[2] = {1, 3, 1, 1, 1, 2};
  m.ratings = {
      {"SRAM", {1, 0, 2, 2}}, {"DRAM", {1, 0, 1, 2}},  {"eDRAM", {1, 0, 1, 2}},
      {"PCRAM", {0, 2, 0, 0}}, {"MRAM", {1, 2, 1, 1}}, {"DWM", {2, 2, 1, 2}},
  };
  return m;
}

std::vector<std::string> ScoringMatrix::violations() const {
  std::vector<std::string> out;
  for (std::size_t level = 0; level < weights.size(); ++level)
    for (int w : weights[level])
      if (w < 1 || w > 3) out.push_back("weight for L" + std::to_string(level + 1) + " outside 1..3");
  for (const auto& [tech, rating] : ratings)
    for (int r : rating)
      if (r < 0 || r > 2) out.push_back("rating for " + tech + " outside 0..2");
  return out;
}

int score_technology(std::string_view tech, CacheTier level, const ScoringMatrix& matrix) {
  auto it = matrix.ratings.find(tech);
  if (it == matrix.ratings.end())
    throw std::out_of_range("no rating for technology '" + std::string(tech) + "'");
  const Rating& r = it->second;
  const Weights& w = matrix.weights.at(static_cast<std::size_t>(level));
  const std::array<int, kCriterionCount> expanded = {r[0], r[1], r[0], r[1], r[2], r[3]};
  int score = 0;
  for (std::size_t i = 0; i < kCriterionCount; ++i) score += w[i] * expanded[i];
  return score;
}

int score_technology(std::string_view tech, std::string_view level, const ScoringMatrix& matrix) {
  return score_technology(tech, parse_cache_tier(level), matrix);
}

}  // namespace tiersim::memtech
