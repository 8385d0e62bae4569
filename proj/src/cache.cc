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

#include "tiersim/cache.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "tiersim/engine.hpp"

namespace tiersim::cache {

char state_letter(LineState state) {
  switch (state) {
    case LineState::kM: return 'M';
    case LineState::kO: return 'O';
    case LineState::kE: return 'E';
    case LineState::kS: return 'S';
    case LineState::kI: return 'I';
  }
  return '?';
}

std::uint64_t CacheGeometry::sets() const {
  const std::uint64_t per_set = static_cast<std::uint64_t>(associativity) * block_size;
  return per_set == 0 ? 0 : capacity / per_set;
}

std::size_t CacheGeometry::region_of(std::uint32_t way) const {
  for (std::size_t i = 0; i < regions.size(); ++i)
    if (way >= regions[i].first_way && way < regions[i].end_way) return i;
  return 0;
}

std::vector<std::string> CacheGeometry::violations() const {
  std::vector<std::string> out;
  if (block_size == 0 || !std::has_single_bit(block_size))
    out.emplace_back("block_size not a power of two");
  else if (block_size < kWordBytes || block_size > kMaxBlockBytes)
    out.emplace_back("block_size must be between 8 and 512 bytes");
  if (associativity == 0) out.emplace_back("associativity must be >= 1");
  if (banks == 0) out.emplace_back("banks must be >= 1");
  if (out.empty()) {
    const std::uint64_t per_set = static_cast<std::uint64_t>(associativity) * block_size;
    const std::uint64_t s = sets();
    if (capacity == 0 || capacity % per_set != 0)
      out.emplace_back("capacity not a multiple of associativity x block_size");
    else if (!std::has_single_bit(s))
      out.emplace_back("sets not a power of two");
    else if (s % banks != 0)
      out.emplace_back("banks does not divide sets");
  }
  if (!regions.empty()) {
    std::vector<std::uint32_t> owner(associativity, 0);
    for (const Region& r : regions) {
      if (r.first_way >= r.end_way || r.end_way > associativity) {
        out.emplace_back("region way range invalid");
        continue;
      }
      for (std::uint32_t w = r.first_way; w < r.end_way; ++w) ++owner[w];
    }
    if (std::any_of(owner.begin(), owner.end(), [](std::uint32_t n) { return n != 1; }))
      out.emplace_back("regions do not partition the ways");
  }
  return out;
}

AddressParts decompose_address(Address addr, const CacheGeometry& geom) {
  const std::uint64_t sets = geom.sets();
  return {addr / (geom.block_size * sets), (addr / geom.block_size) % sets, addr % geom.block_size};
}

Address recompose_address(const AddressParts& parts, const CacheGeometry& geom) {
  return (parts.tag * geom.sets() + parts.set) * geom.block_size + parts.offset;
}

std::uint64_t word_mask(std::uint64_t offset, std::uint64_t size, const CacheGeometry& geom) {
  if (size == 0) return 0;
  const std::uint64_t first = offset / kWordBytes;
  const std::uint64_t last = std::min(offset + size - 1, geom.block_size - 1) / kWordBytes;
  std::uint64_t mask = 0;
  for (std::uint64_t w = first; w <= last; ++w) mask |= std::uint64_t{1} << w;
  return mask;
}

std::optional<std::uint32_t> select_victim(std::span<const CacheLine> set, Replacement policy, Rng& rng) {
  std::vector<std::uint32_t> usable;
  usable.reserve(set.size());
  for (std::uint32_t w = 0; w < set.size(); ++w) {
    if (set[w].worn) continue;
    if (set[w].state == LineState::kI) return w;
    usable.push_back(w);
  }
  if (usable.empty()) return std::nullopt;
  if (policy == Replacement::kPseudoRandom) return usable[rng.below(usable.size())];
  return *std::min_element(usable.begin(), usable.end(), [&](std::uint32_t a, std::uint32_t b) {
    return set[a].lru_stamp < set[b].lru_stamp;
  });
}

WearStatus check_wear(const CacheLine& line, const memtech::TechnologyParams& params) {
  if (params.unlimited_endurance()) return WearStatus::kOk;
  return line.write_count > params.endurance ? WearStatus::kWornOut : WearStatus::kOk;
}

std::uint64_t LevelStats::accesses() const {
  std::uint64_t n = 0;
  for (const RegionCounters& r : regions) n += r.n_read + r.n_write;
  return n;
}

CacheArray::CacheArray(CacheGeometry geometry, std::vector<memtech::TechnologyParams> region_tech,
                       Picoseconds clock_period, double write_mix, Rng rng)
    : geom_(std::move(geometry)),
      sets_(geom_.sets()),
      tech_(std::move(region_tech)),
      write_mix_(write_mix),
      clock_period_(clock_period),
      rng_(rng) {
  if (auto v = geom_.violations(); !v.empty()) throw ConfigError("invalid cache geometry: " + v.front());
  if (geom_.regions.empty()) {
    if (tech_.size() != 1) throw ConfigError("cache without regions needs exactly one technology");
    geom_.regions.push_back({0, geom_.associativity, tech_.front().name});
  }
  if (tech_.size() != geom_.regions.size()) throw ConfigError("one technology per region required");
  for (const auto& t : tech_) {
    read_ps_.push_back(engine::cycles_for_latency(t.read_latency_ns, clock_period) * clock_period);
    write_ps_.push_back(
        engine::cycles_for_latency(memtech::mixed_write_latency_ns(t, write_mix_), clock_period) *
        clock_period);
  }
  lines_.resize(sets_ * geom_.associativity);
  stats_.regions.resize(tech_.size());
}

Address CacheArray::block_of(std::uint64_t set, std::uint32_t way) const {
  return recompose_address({line(set, way).tag, set, 0}, geom_);
}

std::optional<std::uint32_t> CacheArray::find(Address addr) const {
  const AddressParts p = split(addr);
  for (std::uint32_t w = 0; w < geom_.associativity; ++w) {
    const CacheLine& l = line(p.set, w);
    if (l.valid() && l.tag == p.tag) return w;
  }
  return std::nullopt;
}

std::span<const CacheLine> CacheArray::set_lines(std::uint64_t set) const {
  return {lines_.data() + set * geom_.associativity, geom_.associativity};
}

void CacheArray::touch(std::uint64_t set, std::uint32_t way) { line(set, way).lru_stamp = ++stamp_; }

std::optional<std::uint32_t> CacheArray::victim(std::uint64_t set) {
  return select_victim(set_lines(set), geom_.replacement, rng_);
}

double CacheArray::region_capacity_mib(std::size_t region) const {
  const Region& r = geom_.regions[region];
  const double bytes = static_cast<double>(sets_) * (r.end_way - r.first_way) * geom_.block_size;
  return bytes / (1024.0 * 1024.0);
}

Picoseconds CacheArray::hit_latency(std::uint64_t set, std::uint32_t way, CoreOp op) const {
  const std::size_t region = geom_.region_of(way);
  const Picoseconds array = op == CoreOp::kWrite ? write_ps_[region] : read_ps_[region];
  return geom_.bank_latency(geom_.bank_of(set)) * clock_period_ + array;
}

Picoseconds CacheArray::miss_latency(std::uint64_t set) const {
  // Tag check is charged at the first region's read latency.
  return geom_.bank_latency(geom_.bank_of(set)) * clock_period_ + read_ps_.front();
}

void CacheArray::install(Address addr, std::uint32_t way, LineState state, std::span<const std::uint64_t> data) {
  const AddressParts p = split(addr);
  CacheLine& l = line(p.set, way);
  if (l.worn) throw SimulationFault("install into a worn way");
  l.tag = p.tag;
  l.state = state;
  l.dirty_word_mask = 0;
  l.words.assign(geom_.words_per_block(), 0);
  if (!data.empty()) std::copy(data.begin(), data.end(), l.words.begin());
  if (geom_.partial_writes && l.word_writes.empty()) l.word_writes.assign(geom_.words_per_block(), 0);
  touch(p.set, way);
  ++stats_.fills;
}

bool CacheArray::record_write(std::uint64_t set, std::uint32_t way, std::uint64_t mask, Picoseconds now) {
  CacheLine& l = line(set, way);
  if (geom_.partial_writes) {
    if (l.word_writes.empty()) l.word_writes.assign(geom_.words_per_block(), 0);
    for (std::uint32_t w = 0; w < geom_.words_per_block(); ++w) {
      if (!(mask >> w & 1)) continue;
      l.write_count = std::max(l.write_count, ++l.word_writes[w]);
    }
  } else {
    ++l.write_count;
  }
  if (l.worn || check_wear(l, tech_[geom_.region_of(way)]) == WearStatus::kOk) return false;
  stats_.wear_events.push_back({now, block_of(set, way), set, way, l.write_count});
  l.worn = true;
  l.state = LineState::kI;
  return true;
}

void CacheArray::count_access(std::uint64_t set, std::optional<std::uint32_t> way, CoreOp op, bool hit,
                              Picoseconds start, Picoseconds latency) {
  (void)set;
  const std::size_t region = way ? geom_.region_of(*way) : 0;
  if (op == CoreOp::kWrite)
    ++stats_.regions[region].n_write;
  else
    ++stats_.regions[region].n_read;
  if (hit) {
    ++stats_.hits;
    stats_.hit_latency_sum += latency;
  } else {
    ++stats_.misses;
  }
  const Picoseconds end = start + latency;
  if (start >= stats_.busy_until) {
    stats_.busy_time += latency;
    stats_.busy_until = end;
  } else if (end > stats_.busy_until) {
    stats_.busy_time += end - stats_.busy_until;
    stats_.busy_until = end;
  }
}

AccessResult CacheArray::lookup_and_update(CoreOp op, Address addr, std::uint64_t size, Picoseconds now) {
  const AddressParts p = split(addr);
  AccessResult r;
  if (auto way = find(addr)) {
    r.hit = true;
    r.way = *way;
    r.latency = hit_latency(p.set, *way, op);
    touch(p.set, *way);
    if (op == CoreOp::kWrite) {
      const std::uint64_t mask = word_mask(p.offset, size, geom_);
      CacheLine& l = line(p.set, *way);
      l.state = LineState::kM;
      l.dirty_word_mask |= mask;
      record_write(p.set, *way, mask, now);
    }
    count_access(p.set, way, op, true, now, r.latency);
    return r;
  }
  r.victim = victim(p.set);
  r.latency = miss_latency(p.set);
  count_access(p.set, r.victim, op, false, now, r.latency);
  return r;
}

void CacheArray::fill(CoreOp op, Address addr, std::uint64_t size, std::uint32_t way, Picoseconds now) {
  const AddressParts p = split(addr);
  if (line(p.set, way).valid()) {
    ++stats_.evictions;
    if (is_dirty(line(p.set, way).state)) ++stats_.writebacks;
  }
  install(block_address(addr), way, op == CoreOp::kWrite ? LineState::kM : LineState::kE, {});
  if (op == CoreOp::kWrite) {
    const std::uint64_t mask = word_mask(p.offset, size, geom_);
    line(p.set, way).dirty_word_mask = mask;
    record_write(p.set, way, mask, now);
  }
}

std::uint64_t CacheArray::worn_blocks() const {
  return static_cast<std::uint64_t>(std::count_if(lines_.begin(), lines_.end(), [](const CacheLine& l) { return l.worn; }));
}

std::uint64_t CacheArray::max_write_count() const {
  std::uint64_t m = 0;
  for (const CacheLine& l : lines_) m = std::max(m, l.write_count);
  return m;
}

}  // namespace tiersim::cache
