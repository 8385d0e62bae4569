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
#include <span>
#include <string>
#include <vector>

#include "tiersim/memtech.hpp"
#include "tiersim/rng.hpp"
#include "tiersim/types.hpp"

namespace tiersim::cache {

/// Granularity of partial writes and of the per-word data model.
inline constexpr std::uint64_t kWordBytes = 8;
/// Largest block whose dirty words fit one 64-bit mask.
inline constexpr std::uint64_t kMaxBlockBytes = 64 * kWordBytes;

enum class Replacement { kLru, kPseudoRandom };

enum class LineState : std::uint8_t { kM, kO, kE, kS, kI };

char state_letter(LineState state);
inline bool is_dirty(LineState s) { return s == LineState::kM || s == LineState::kO; }

/// A contiguous way range [first_way, end_way) built from one technology.
struct Region {
  std::uint32_t first_way = 0;
  std::uint32_t end_way = 0;
  std::string technology;
};

struct CacheGeometry {
  std::uint64_t capacity = 32 * 1024;
  std::uint64_t block_size = 64;
  std::uint32_t associativity = 2;
  std::uint32_t banks = 1;
  Replacement replacement = Replacement::kLru;
  Cycles nuca_base_latency = 0;
  Cycles nuca_per_hop = 0;
  std::vector<Region> regions;
  bool partial_writes = false;

  std::uint64_t sets() const;
  std::uint32_t words_per_block() const { return static_cast<std::uint32_t>(block_size / kWordBytes); }

  /// Banks are interleaved on the set index; bank k sits k hops from the
  /// controller.
  std::uint32_t bank_of(std::uint64_t set) const { return static_cast<std::uint32_t>(set % banks); }
  Cycles bank_latency(std::uint32_t bank) const { return nuca_base_latency + bank * nuca_per_hop; }

  std::size_t region_of(std::uint32_t way) const;

  std::vector<std::string> violations() const;
};

struct AddressParts {
  std::uint64_t tag = 0;
  std::uint64_t set = 0;
  std::uint64_t offset = 0;

  bool operator==(const AddressParts&) const = default;
};

AddressParts decompose_address(Address addr, const CacheGeometry& geom);
Address recompose_address(const AddressParts& parts, const CacheGeometry& geom);

/// Words of a block touched by an access of `size` bytes at `offset`,
/// clipped to the block.
std::uint64_t word_mask(std::uint64_t offset, std::uint64_t size, const CacheGeometry& geom);

struct CacheLine {
  std::uint64_t tag = 0;
  LineState state = LineState::kI;
  std::uint64_t lru_stamp = 0;
  std::uint64_t write_count = 0;
  std::uint64_t dirty_word_mask = 0;
  bool worn = false;
  std::vector<std::uint64_t> words;
  std::vector<std::uint64_t> word_writes;

  bool valid() const { return state != LineState::kI && !worn; }
};

/// Invalid (and unworn) ways first, then LRU minimum stamp or a seeded
/// uniform pick. Worn ways are never chosen; nullopt if every way is worn.
std::optional<std::uint32_t> select_victim(std::span<const CacheLine> set, Replacement policy, Rng& rng);

enum class WearStatus { kOk, kWornOut };

WearStatus check_wear(const CacheLine& line, const memtech::TechnologyParams& params);

struct WearEvent {
  Picoseconds time = 0;
  Address block = 0;
  std::uint64_t set = 0;
  std::uint32_t way = 0;
  std::uint64_t write_count = 0;
};

struct RegionCounters {
  std::uint64_t n_read = 0;
  std::uint64_t n_write = 0;
};

struct LevelStats {
  std::vector<RegionCounters> regions;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t fills = 0;
  std::uint64_t evictions = 0;
  std::uint64_t writebacks = 0;
  Picoseconds hit_latency_sum = 0;
  Picoseconds busy_time = 0;
  Picoseconds busy_until = 0;
  std::vector<WearEvent> wear_events;

  std::uint64_t accesses() const;
};

enum class CoreOp { kRead, kWrite };

struct AccessResult {
  bool hit = false;
  std::uint32_t way = 0;
  Picoseconds latency = 0;
  /// Miss only; empty when every way of the set is worn.
  std::optional<std::uint32_t> victim;
};

/// One cache instance: tag/state array, replacement, NUCA latency, hybrid
/// regions, per-line wear, and the level's access counters.
class CacheArray {
 public:
  CacheArray(CacheGeometry geometry, std::vector<memtech::TechnologyParams> region_tech,
             Picoseconds clock_period, double write_mix, Rng rng);

  const CacheGeometry& geometry() const { return geom_; }
  std::uint64_t sets() const { return sets_; }
  AddressParts split(Address addr) const { return decompose_address(addr, geom_); }
  Address block_address(Address addr) const { return addr - addr % geom_.block_size; }
  Address block_of(std::uint64_t set, std::uint32_t way) const;

  std::optional<std::uint32_t> find(Address addr) const;
  CacheLine& line(std::uint64_t set, std::uint32_t way) { return lines_[set * geom_.associativity + way]; }
  const CacheLine& line(std::uint64_t set, std::uint32_t way) const {
    return lines_[set * geom_.associativity + way];
  }
  std::span<const CacheLine> set_lines(std::uint64_t set) const;

  void touch(std::uint64_t set, std::uint32_t way);
  std::optional<std::uint32_t> victim(std::uint64_t set);

  const memtech::TechnologyParams& region_tech(std::size_t region) const { return tech_[region]; }
  std::size_t region_count() const { return tech_.size(); }
  double region_capacity_mib(std::size_t region) const;

  Picoseconds hit_latency(std::uint64_t set, std::uint32_t way, CoreOp op) const;
  Picoseconds miss_latency(std::uint64_t set) const;

  /// Installs a block into (set, way), replacing whatever was there. The
  /// caller handles the victim first. Data words are zero-filled when
  /// `data` is empty.
  void install(Address addr, std::uint32_t way, LineState state, std::span<const std::uint64_t> data);

  /// Applies wear for a write of the words in `mask`. Returns true when this
  /// write wore the line out; the line is then marked worn and invalid, and
  /// the caller must push its data to the next level.
  bool record_write(std::uint64_t set, std::uint32_t way, std::uint64_t mask, Picoseconds now);

  /// Counts one access charged to `way`'s region and marks the array busy
  /// for [start, start + latency).
  void count_access(std::uint64_t set, std::optional<std::uint32_t> way, CoreOp op, bool hit,
                    Picoseconds start, Picoseconds latency);

  /// Single-level access with write-back/write-allocate semantics: refreshes
  /// LRU and applies write wear on a hit; reports the victim on a miss.
  AccessResult lookup_and_update(CoreOp op, Address addr, std::uint64_t size, Picoseconds now);

  /// Completes a miss reported by lookup_and_update.
  void fill(CoreOp op, Address addr, std::uint64_t size, std::uint32_t way, Picoseconds now);

  LevelStats& stats() { return stats_; }
  const LevelStats& stats() const { return stats_; }

  std::uint64_t worn_blocks() const;
  std::uint64_t max_write_count() const;
  double write_mix() const { return write_mix_; }

 private:
  CacheGeometry geom_;
  std::uint64_t sets_;
  std::vector<memtech::TechnologyParams> tech_;
  std::vector<Picoseconds> read_ps_;
  std::vector<Picoseconds> write_ps_;
  double write_mix_;
  Picoseconds clock_period_ = 1000;
  Rng rng_;
  std::vector<CacheLine> lines_;
  std::uint64_t stamp_ = 0;
  LevelStats stats_;
};

}  // namespace tiersim::cache
