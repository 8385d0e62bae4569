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

#include "tiersim/spec.hpp"

#include <algorithm>
#include <set>

namespace tiersim::arch {

using nlohmann::json;

namespace {

/// Reads typed fields from one JSON object and remembers which keys were
/// consumed, so leftovers can be reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    used_.insert(key);
    auto it = j_.find(key);
    return (it == j_.end() || it->is_null()) ? nullptr : &*it;
  }

  void report_unknown(std::vector<Violation>* sink) const {
    if (!sink) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) sink->push_back({path_ + "." + it.key(), "unknown key"});
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

cache::Replacement parse_replacement(const std::string& s, const std::string& path) {
  if (s == "LRU") return cache::Replacement::kLru;
  if (s == "PseudoRandom") return cache::Replacement::kPseudoRandom;
  throw ConfigError(path + ": replacement must be LRU or PseudoRandom");
}

LevelConfig parse_level(const json& j, const std::string& path, std::vector<Violation>* unknown,
                        L2Sharing* sharing, LevelConfig l) {
  Fields f(j, path);
  cache::CacheGeometry& g = l.geometry;
  f.read("capacity", g.capacity);
  f.read("block_size", g.block_size);
  f.read("associativity", g.associativity);
  f.read("banks", g.banks);
  std::string replacement = g.replacement == cache::Replacement::kLru ? "LRU" : "PseudoRandom";
  f.read("replacement", replacement);
  g.replacement = parse_replacement(replacement, path + ".replacement");
  f.read("nuca_base_latency", g.nuca_base_latency);
  f.read("nuca_per_hop", g.nuca_per_hop);
  f.read("partial_writes", g.partial_writes);
  f.read("tech", l.technology);
  if (const json* regions = f.child("regions")) {
    g.regions.clear();
    if (!regions->is_array()) throw ConfigError(path + ".regions: expected an array");
    for (std::size_t i = 0; i < regions->size(); ++i) {
      Fields rf((*regions)[i], path + ".regions[" + std::to_string(i) + "]");
      std::array<std::uint32_t, 2> ways{};
      cache::Region r;
      rf.read("ways", ways);
      rf.read("tech", r.technology);
      r.first_way = ways[0];
      r.end_way = ways[1];
      g.regions.push_back(std::move(r));
      rf.report_unknown(unknown);
    }
  }
  if (sharing) {
    std::string s = *sharing == L2Sharing::kShared ? "shared" : "private";
    f.read("sharing", s);
    if (s == "shared")
      *sharing = L2Sharing::kShared;
    else if (s == "private")
      *sharing = L2Sharing::kPrivate;
    else
      throw ConfigError(path + ".sharing: must be shared or private");
  }
  f.report_unknown(unknown);
  return l;
}

TierKind parse_tier_kind(const std::string& s, const std::string& path) {
  if (s == "cores_l1") return TierKind::kCoresL1;
  if (s == "l2_split_id") return TierKind::kL2SplitId;
  if (s == "l3_unified") return TierKind::kL3Unified;
  if (s == "memory") return TierKind::kMemory;
  throw ConfigError(path + ": unknown tier kind '" + s + "'");
}

void apply_technology(memtech::TechnologyParams& t, const json& j, const std::string& path,
                      std::vector<Violation>* unknown) {
  Fields f(j, path);
  f.read("read_latency", t.read_latency_ns);
  f.read("write_set_latency", t.write_set_latency_ns);
  f.read("write_reset_latency", t.write_reset_latency_ns);
  f.read("read_energy", t.read_energy_nj);
  f.read("write_set_energy", t.write_set_energy_nj);
  f.read("write_reset_energy", t.write_reset_energy_nj);
  f.read("standby_power_per_mib", t.standby_power_mw_per_mib);
  f.read("norm_density", t.norm_density);
  f.read("non_volatile", t.non_volatile);
  if (const json* e = f.child("endurance")) {
    if (e->is_string() && e->get<std::string>() == "unlimited") {
      t.endurance = memtech::kUnlimitedEndurance;
    } else if (e->is_number()) {
      const double v = e->get<double>();
      if (v >= memtech::kUnlimitedEnduranceThreshold)
        t.endurance = memtech::kUnlimitedEndurance;
      else if (v < 1.0)
        t.endurance = 0;
      else
        t.endurance = static_cast<std::uint64_t>(v);
    } else {
      throw ConfigError(path + ".endurance: expected a number or \"unlimited\"");
    }
  }
  f.report_unknown(unknown);
}

bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

void check_level(const SystemSpec& spec, const LevelConfig& l, const std::string& path,
                 std::vector<Violation>& out) {
  for (const std::string& v : l.geometry.violations()) out.push_back({path, v});
  auto has_tech = [&](const std::string& name) { return spec.technologies.count(name) > 0; };
  if (l.geometry.regions.empty()) {
    if (!has_tech(l.technology)) out.push_back({path + ".tech", "unknown technology '" + l.technology + "'"});
  } else {
    for (std::size_t i = 0; i < l.geometry.regions.size(); ++i)
      if (!has_tech(l.geometry.regions[i].technology))
        out.push_back({path + ".regions[" + std::to_string(i) + "].tech",
                       "unknown technology '" + l.geometry.regions[i].technology + "'"});
  }
}

}  // namespace

std::string_view tier_kind_name(TierKind kind) {
  switch (kind) {
    case TierKind::kCoresL1: return "cores_l1";
    case TierKind::kL2SplitId: return "l2_split_id";
    case TierKind::kL3Unified: return "l3_unified";
    case TierKind::kMemory: return "memory";
  }
  return "?";
}

bool SystemSpec::tier_owns(const TierSpec& tier, std::uint32_t cluster) const {
  return tier.clusters.empty() ||
         std::find(tier.clusters.begin(), tier.clusters.end(), cluster) != tier.clusters.end();
}

std::optional<std::size_t> SystemSpec::tier_of(TierKind kind, std::uint32_t cluster) const {
  for (std::size_t i = 0; i < tier_stack.size(); ++i)
    if (tier_stack[i].kind == kind && tier_owns(tier_stack[i], cluster)) return i;
  return std::nullopt;
}

SystemSpec parse_system(const json& j, std::vector<Violation>* unknown) {
  SystemSpec s;
  Fields f(j, "system");
  f.read("name", s.name);
  std::array<std::uint32_t, 2> grid{s.grid_x, s.grid_y};
  f.read("cluster_grid", grid);
  s.grid_x = grid[0];
  s.grid_y = grid[1];
  f.read("cores_per_cluster", s.cores_per_cluster);
  f.read("memory_latency_ns", s.memory_latency_ns);
  f.read("bus_beat_width", s.bus_beat_width);
  f.read("write_mix", s.write_mix);

  if (const json* noc = f.child("noc")) {
    Fields nf(*noc, "system.noc");
    std::array<std::uint32_t, 3> dims{s.grid_x, s.grid_y, 1};
    nf.read("dims", dims);
    s.noc.dims = {dims[0], dims[1], dims[2]};
    nf.read("link_latency", s.noc.link_latency);
    nf.read("tsv_latency", s.noc.tsv_latency);
    nf.read("router_delay", s.noc.router_delay);
    nf.read("flit_width", s.noc.flit_width);
    nf.report_unknown(unknown);
  } else {
    s.noc.dims = {s.grid_x, s.grid_y, 1};
  }

  if (const json* clocks = f.child("clocks")) {
    Fields cf(*clocks, "system.clocks");
    cf.read("core_ps", s.clocks.core);
    cf.read("bus_ps", s.clocks.bus);
    cf.read("noc_ps", s.clocks.noc);
    cf.report_unknown(unknown);
  }

  if (const json* tiers = f.child("tiers")) {
    if (!tiers->is_array()) throw ConfigError("system.tiers: expected an array");
    s.tier_stack.clear();
    for (std::size_t i = 0; i < tiers->size(); ++i) {
      const std::string path = "system.tiers[" + std::to_string(i) + "]";
      Fields tf((*tiers)[i], path);
      TierSpec t;
      std::string kind = "cores_l1";
      tf.read("kind", kind);
      t.kind = parse_tier_kind(kind, path + ".kind");
      if (const json* c = tf.child("clusters")) {
        if (c->is_string()) {
          if (c->get<std::string>() != "all") throw ConfigError(path + ".clusters: expected \"all\" or a list");
        } else {
          tf.read("clusters", t.clusters);
        }
      }
      tf.report_unknown(unknown);
      s.tier_stack.push_back(std::move(t));
    }
  }

  // Baseline cache geometry; each level object overrides field by field.
  s.l1i.geometry = {32 * 1024, 64, 2, 1, cache::Replacement::kLru, 0, 0, {}, false};
  s.l1d.geometry = s.l1i.geometry;
  s.l2.geometry = {1024 * 1024, 64, 16, 1, cache::Replacement::kPseudoRandom, 0, 0, {}, false};
  auto level = [&](const char* key, LevelConfig& out, L2Sharing* sharing) {
    if (const json* lj = f.child(key)) out = parse_level(*lj, std::string("system.") + key, unknown, sharing, out);
  };
  level("l1i", s.l1i, nullptr);
  level("l1d", s.l1d, nullptr);
  level("l2", s.l2, &s.l2_sharing);
  if (f.child("l3")) {
    LevelConfig l3;
    l3.geometry = {8 * 1024 * 1024, 64, 16, 1, cache::Replacement::kPseudoRandom, 0, 0, {}, false};
    level("l3", l3, nullptr);
    s.l3 = std::move(l3);
  }

  if (const json* techs = f.child("technologies")) {
    if (!techs->is_object()) throw ConfigError("system.technologies: expected an object");
    for (auto it = techs->begin(); it != techs->end(); ++it) {
      auto [entry, fresh] = s.technologies.try_emplace(it.key());
      if (fresh) entry->second.name = it.key();
      apply_technology(entry->second, it.value(), "system.technologies." + it.key(), unknown);
    }
  }
  f.report_unknown(unknown);
  return s;
}

std::vector<Violation> validate_spec(const SystemSpec& spec) {
  std::vector<Violation> out;
  for (const auto& [name, tech] : spec.technologies)
    for (const std::string& v : tech.violations()) out.push_back({"system.technologies." + name, v});

  if (spec.grid_x < 1 || spec.grid_y < 1) out.push_back({"system.cluster_grid", "cluster grid must be >= 1x1"});
  if (spec.cores_per_cluster < 1) out.push_back({"system.cores_per_cluster", "must be >= 1"});
  for (const std::string& v : spec.noc.violations()) out.push_back({"system.noc", v});
  if (spec.noc.dims.x != spec.grid_x || spec.noc.dims.y != spec.grid_y)
    out.push_back({"system.noc.dims", "mesh x/y must match the cluster grid"});
  if (spec.clocks.core == 0 || spec.clocks.bus == 0 || spec.clocks.noc == 0)
    out.push_back({"system.clocks", "clock periods must be > 0"});
  if (spec.clocks.core > 1'000'000 || spec.clocks.bus > 1'000'000 || spec.clocks.noc > 1'000'000)
    out.push_back({"system.clocks", "clock period above 1 us is not sane"});
  if (!(spec.memory_latency_ns > 0.0)) out.push_back({"system.memory_latency_ns", "must be > 0"});
  if (spec.bus_beat_width == 0) out.push_back({"system.bus_beat_width", "must be > 0"});
  if (!(spec.write_mix >= 0.0 && spec.write_mix <= 1.0)) out.push_back({"system.write_mix", "must lie in [0, 1]"});

  check_level(spec, spec.l1i, "system.l1i", out);
  check_level(spec, spec.l1d, "system.l1d", out);
  check_level(spec, spec.l2, "system.l2", out);
  if (spec.l3) check_level(spec, *spec.l3, "system.l3", out);
  const std::uint64_t block = spec.l1d.geometry.block_size;
  if (is_power_of_two(block) && (spec.l2.geometry.block_size != block || spec.l1i.geometry.block_size != block ||
                                 (spec.l3 && spec.l3->geometry.block_size != block)))
    out.push_back({"system", "all cache levels must share one block_size"});

  // Tier stack.
  if (spec.tier_stack.empty()) out.push_back({"system.tiers", "tier stack is empty"});
  const std::uint32_t clusters = spec.clusters();
  for (std::size_t i = 0; i < spec.tier_stack.size(); ++i) {
    const TierSpec& t = spec.tier_stack[i];
    const std::string path = "system.tiers[" + std::to_string(i) + "]";
    for (std::uint32_t c : t.clusters)
      if (c >= clusters) out.push_back({path + ".clusters", "cluster " + std::to_string(c) + " does not exist"});
    auto adjacent_kind = [&](TierKind kind) {
      auto shares = [&](const TierSpec& other) {
        if (t.clusters.empty() || other.clusters.empty()) return true;
        return std::any_of(t.clusters.begin(), t.clusters.end(), [&](std::uint32_t c) {
          return std::find(other.clusters.begin(), other.clusters.end(), c) != other.clusters.end();
        });
      };
      return (i > 0 && spec.tier_stack[i - 1].kind == kind && shares(spec.tier_stack[i - 1])) ||
             (i + 1 < spec.tier_stack.size() && spec.tier_stack[i + 1].kind == kind &&
              shares(spec.tier_stack[i + 1]));
    };
    switch (t.kind) {
      case TierKind::kCoresL1:
        break;
      case TierKind::kL2SplitId:
        if (!adjacent_kind(TierKind::kCoresL1))
          out.push_back({path, "l2_split_id tier is adjacent to no cores_l1 tier"});
        break;
      case TierKind::kL3Unified:
        if (!adjacent_kind(TierKind::kL2SplitId))
          out.push_back({path, "l3_unified tier is adjacent to no l2_split_id tier"});
        if (!spec.l3) out.push_back({path, "l3_unified tier without an l3 level"});
        break;
      case TierKind::kMemory:
        if (!adjacent_kind(TierKind::kL2SplitId) && !adjacent_kind(TierKind::kL3Unified))
          out.push_back({path, "memory tier is adjacent to no cache tier"});
        break;
    }
  }
  for (std::uint32_t c = 0; c < clusters; ++c) {
    for (TierKind kind : {TierKind::kCoresL1, TierKind::kL2SplitId, TierKind::kL3Unified, TierKind::kMemory}) {
      std::size_t n = 0;
      for (const TierSpec& t : spec.tier_stack)
        if (t.kind == kind && spec.tier_owns(t, c)) ++n;
      if (kind == TierKind::kCoresL1 && n != 1)
        out.push_back({"system.tiers", "cluster " + std::to_string(c) + " must sit on exactly one cores_l1 tier"});
      else if (n > 1)
        out.push_back({"system.tiers", "cluster " + std::to_string(c) + " appears on several " +
                                           std::string(tier_kind_name(kind)) + " tiers"});
    }
  }
  return out;
}

namespace {

json level_json(std::uint64_t capacity, std::uint32_t ways, const char* replacement, const char* tech) {
  return {{"capacity", capacity}, {"block_size", 64},  {"associativity", ways},
          {"replacement", replacement}, {"tech", tech}};
}

json base_system(const char* name, std::uint32_t gx, std::uint32_t gy, std::uint32_t gz) {
  json s;
  s["name"] = name;
  s["cluster_grid"] = {gx, gy};
  s["cores_per_cluster"] = 8;
  s["noc"] = {{"dims", {gx, gy, gz}}, {"link_latency", 1}, {"tsv_latency", 1}, {"router_delay", 1}, {"flit_width", 16}};
  s["tiers"] = json::array({{{"kind", "cores_l1"}, {"clusters", "all"}}});
  s["l1i"] = level_json(32 * 1024, 2, "LRU", "SRAM");
  s["l1d"] = level_json(32 * 1024, 2, "LRU", "SRAM");
  s["l2"] = level_json(1024 * 1024, 16, "PseudoRandom", "SRAM");
  s["l2"]["sharing"] = "shared";
  s["memory_latency_ns"] = 50.0;
  s["clocks"] = {{"core_ps", 1000}, {"bus_ps", 1000}, {"noc_ps", 1000}};
  s["bus_beat_width"] = 16;
  s["write_mix"] = 0.5;
  return s;
}

json tier(const char* kind, json clusters = "all") { return {{"kind", kind}, {"clusters", std::move(clusters)}}; }

}  // namespace

std::vector<std::string> preset_names() { return {"fig32", "fig33", "fig34", "fig35a", "fig35b", "fig36"}; }

json preset_system(std::string_view name) {
  if (name == "fig32") return base_system("fig32", 1, 1, 1);
  if (name == "fig33") return base_system("fig33", 2, 2, 1);
  if (name == "fig34") {
    json s = base_system("fig34", 2, 2, 1);
    s["tiers"] = json::array({tier("cores_l1"), tier("l2_split_id")});
    return s;
  }
  if (name == "fig35a") {
    json s = base_system("fig35a", 2, 2, 1);
    s["tiers"] = json::array({tier("cores_l1"), tier("l2_split_id")});
    s["l2"] = level_json(2 * 1024 * 1024, 16, "PseudoRandom", "MRAM");
    s["l2"]["sharing"] = "shared";
    return s;
  }
  if (name == "fig35b") {
    json s = base_system("fig35b", 2, 2, 1);
    s["tiers"] = json::array({tier("cores_l1"), tier("l2_split_id"), tier("l3_unified")});
    s["l3"] = level_json(8 * 1024 * 1024, 16, "PseudoRandom", "PCRAM");
    return s;
  }
  if (name == "fig36") {
    json s = base_system("fig36", 2, 2, 2);
    const json lower = {0, 1, 2, 3};
    const json upper = {4, 5, 6, 7};
    s["tiers"] = json::array({tier("cores_l1", lower), tier("l2_split_id", lower), tier("l3_unified"),
                              tier("l2_split_id", upper), tier("cores_l1", upper)});
    s["noc"]["tsv_latency"] = 3;
    s["l3"] = level_json(4 * 1024 * 1024, 16, "PseudoRandom", "PCRAM");
    return s;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

json preset_run_config(std::string_view name) {
  json system = preset_system(name);
  json cfg;
  cfg["seed"] = 1;
  cfg["t_end_ps"] = nullptr;
  cfg["latency_bucket_ps"] = 1000;
  cfg["system"] = system;
  json workload;
  workload["synthetic"] = {{"length", 1000},          {"hot_fraction", 0.9},  {"hot_set_bytes", 16384},
                           {"read_write_ratio", 2.0}, {"overlap", 0.0},      {"access_size", 8},
                           {"tick_stride", 4},        {"address_space_bytes", 1ULL << 32}};
  const auto grid = system["cluster_grid"];
  const std::uint64_t clusters =
      grid[0].get<std::uint64_t>() * grid[1].get<std::uint64_t>() * system["noc"]["dims"][2].get<std::uint64_t>();
  if (clusters > 1) workload["message_traffic"] = {{"cycles", 20000}, {"rate", 0.002}, {"payload_bytes", 256}};
  cfg["workload"] = workload;
  return cfg;
}

}  // namespace tiersim::arch
