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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "tiersim/cache.hpp"

using namespace tiersim;
using namespace tiersim::cache;

namespace {

memtech::TechnologyParams tech(const char* name) { return memtech::catalog_default().at(name); }

CacheGeometry geom(std::uint64_t capacity, std::uint64_t block, std::uint32_t ways) {
  CacheGeometry g;
  g.capacity = capacity;
  g.block_size = block;
  g.associativity = ways;
  return g;
}

CacheArray array(const CacheGeometry& g, const char* t = "SRAM", std::uint64_t seed = 1) {
  return CacheArray(g, {tech(t)}, 1000, 0.5, Rng(seed));
}

}  // namespace

TEST_CASE("address decomposition") {
  const CacheGeometry g = geom(32 * 1024, 64, 2);
  CHECK(g.sets() == 256);
  CHECK(decompose_address(0x12345, g) == AddressParts{4, 141, 5});
  CHECK(decompose_address(0, g) == AddressParts{0, 0, 0});
  Rng rng(77);
  for (int i = 0; i < 10000; ++i) {
    const Address a = rng.below(kAddressLimit);
    CHECK(recompose_address(decompose_address(a, g), g) == a);
  }
}

TEST_CASE("geometry violations") {
  CHECK(geom(32 * 1024, 64, 2).violations().empty());
  const auto v = geom(48 * 512, 48, 2).violations();
  REQUIRE(v.size() == 1);
  CHECK(v.front() == "block_size not a power of two");
  CHECK_FALSE(geom(3 * 64 * 2, 64, 2).violations().empty());
  CHECK_FALSE(geom(1000, 64, 2).violations().empty());
  CacheGeometry g = geom(32 * 1024, 64, 2);
  g.banks = 3;
  CHECK_FALSE(g.violations().empty());
  g = geom(32 * 1024, 64, 4);
  g.regions = {{0, 2, "SRAM"}, {1, 4, "PCRAM"}};
  CHECK_FALSE(g.violations().empty());
  g.regions = {{0, 2, "SRAM"}, {2, 4, "PCRAM"}};
  CHECK(g.violations().empty());
}

TEST_CASE("word masks clip to the block") {
  const CacheGeometry g = geom(1024, 64, 1);
  CHECK(word_mask(0, 8, g) == 0x1);
  CHECK(word_mask(4, 8, g) == 0x3);
  CHECK(word_mask(56, 64, g) == 0x80);
  CHECK(word_mask(0, 64, g) == 0xff);
}

TEST_CASE("LRU evicts the least recently used way") {
  CacheArray c = array(geom(2 * 64, 64, 2));
  const Address a = 0, b = 64, cc = 128;
  for (Address x : {a, b}) {
    auto r = c.lookup_and_update(CoreOp::kRead, x, 8, 0);
    REQUIRE_FALSE(r.hit);
    c.fill(CoreOp::kRead, x, 8, *r.victim, 0);
  }
  CHECK(c.lookup_and_update(CoreOp::kRead, a, 8, 0).hit);
  auto r = c.lookup_and_update(CoreOp::kRead, cc, 8, 0);
  REQUIRE_FALSE(r.hit);
  REQUIRE(r.victim);
  CHECK(c.block_of(0, *r.victim) == b);
}

TEST_CASE("victim selection") {
  Rng rng(1);
  std::vector<CacheLine> set(4);
  for (std::uint32_t w = 0; w < 4; ++w) set[w].state = LineState::kS;
  set[2].state = LineState::kI;
  CHECK(select_victim(set, Replacement::kLru, rng) == 2u);
  CHECK(select_victim(set, Replacement::kPseudoRandom, rng) == 2u);

  set[2].state = LineState::kS;
  const std::uint64_t stamps[] = {5, 3, 9, 1};
  for (std::uint32_t w = 0; w < 4; ++w) set[w].lru_stamp = stamps[w];
  CHECK(select_victim(set, Replacement::kLru, rng) == 3u);

  set[3].worn = true;
  CHECK(select_victim(set, Replacement::kLru, rng) == 1u);
  for (auto& l : set) l.worn = true;
  CHECK_FALSE(select_victim(set, Replacement::kLru, rng).has_value());
}

TEST_CASE("pseudo-random replacement is reproducible") {
  auto picks = [](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CacheLine> set(8);
    for (auto& l : set) l.state = LineState::kE;
    std::vector<std::uint32_t> out;
    for (int i = 0; i < 200; ++i) out.push_back(*select_victim(set, Replacement::kPseudoRandom, rng));
    return out;
  };
  CHECK(picks(4) == picks(4));
  const auto p = picks(4);
  CHECK(std::set<std::uint32_t>(p.begin(), p.end()).size() == 8);
}

TEST_CASE("NUCA bank latency grows by hop") {
  CacheGeometry g = geom(64 * 1024, 64, 4);
  g.banks = 4;
  g.nuca_base_latency = 2;
  g.nuca_per_hop = 1;
  for (std::uint32_t k = 0; k < 4; ++k) CHECK(g.bank_latency(k) == 2 + k);
  CHECK(g.bank_latency(3) == 5);
  CHECK(g.bank_of(7) == 3);
  CacheArray c = array(g);
  const Picoseconds array_ps = 3000;
  CHECK(c.hit_latency(3, 0, CoreOp::kRead) == 5 * 1000 + array_ps);
  CHECK(c.hit_latency(4, 0, CoreOp::kRead) == 2 * 1000 + array_ps);
}

TEST_CASE("partial writes count each word separately") {
  CacheGeometry g = geom(1024, 64, 1);
  g.partial_writes = true;
  CacheArray c = array(g, "PCRAM");
  auto r = c.lookup_and_update(CoreOp::kWrite, 0, 8, 0);
  c.fill(CoreOp::kWrite, 0, 8, *r.victim, 0);
  CHECK(c.line(0, 0).write_count == 1);
  c.lookup_and_update(CoreOp::kWrite, 0, 8, 0);
  CHECK(c.line(0, 0).write_count == 2);
  c.lookup_and_update(CoreOp::kWrite, 16, 8, 0);
  CHECK(c.line(0, 0).write_count == 2);
  CHECK(c.line(0, 0).dirty_word_mask == 0x5);

  CacheGeometry whole = geom(1024, 64, 1);
  CacheArray d = array(whole, "PCRAM");
  r = d.lookup_and_update(CoreOp::kWrite, 0, 8, 0);
  d.fill(CoreOp::kWrite, 0, 8, *r.victim, 0);
  d.lookup_and_update(CoreOp::kWrite, 16, 8, 0);
  d.lookup_and_update(CoreOp::kWrite, 24, 8, 0);
  CHECK(d.line(0, 0).write_count == 3);
}

TEST_CASE("wear checks") {
  auto p = tech("PCRAM");
  p.endurance = 3;
  CacheLine l;
  for (std::uint64_t n = 1; n <= 3; ++n) {
    l.write_count = n;
    CHECK(check_wear(l, p) == WearStatus::kOk);
  }
  l.write_count = 4;
  CHECK(check_wear(l, p) == WearStatus::kWornOut);
  l.write_count = ~std::uint64_t{0} - 1;
  CHECK(check_wear(l, tech("SRAM")) == WearStatus::kOk);
}

TEST_CASE("one block written 1500 times wears out once, at write 1001") {
  auto p = tech("PCRAM");
  p.endurance = 1000;
  CacheArray c(geom(2 * 64, 64, 2), {p}, 1000, 0.5, Rng(1));
  std::uint64_t writes = 0;
  for (int i = 0; i < 1500; ++i) {
    ++writes;
    auto r = c.lookup_and_update(CoreOp::kWrite, 0x40, 8, writes);
    if (!r.hit) {
      REQUIRE(r.victim);
      c.fill(CoreOp::kWrite, 0x40, 8, *r.victim, writes);
    }
  }
  const auto& ev = c.stats().wear_events;
  REQUIRE(ev.size() == 1);
  CHECK(ev.front().time == 1001);
  CHECK(ev.front().write_count == 1001);
  CHECK(c.worn_blocks() == 1);
}

TEST_CASE("hybrid regions carry their own latency and counters") {
  CacheGeometry g = geom(16 * 64 * 4, 64, 16);
  g.regions = {{0, 8, "SRAM"}, {8, 16, "PCRAM"}};
  CacheArray c(g, {tech("SRAM"), tech("PCRAM")}, 1000, 0.5, Rng(1));
  CHECK(c.region_count() == 2);
  CHECK(c.hit_latency(0, 0, CoreOp::kRead) == 3000);
  CHECK(c.hit_latency(0, 8, CoreOp::kRead) == 4000);
  CHECK(c.hit_latency(0, 8, CoreOp::kWrite) == 74000);
  c.count_access(0, 9u, CoreOp::kWrite, true, 0, 74000);
  c.count_access(0, 1u, CoreOp::kRead, true, 0, 3000);
  CHECK(c.stats().regions[1].n_write == 1);
  CHECK(c.stats().regions[0].n_read == 1);
  CHECK(c.region_capacity_mib(0) == doctest::Approx(4.0 * 8 * 64 / 1048576.0));
}

TEST_CASE("busy time is the union of access windows") {
  CacheArray c = array(geom(1024, 64, 1));
  c.count_access(0, 0u, CoreOp::kRead, true, 0, 3000);
  c.count_access(0, 0u, CoreOp::kRead, true, 1000, 3000);
  c.count_access(0, 0u, CoreOp::kRead, true, 10000, 3000);
  CHECK(c.stats().busy_time == 7000);
}

TEST_CASE("LRU matches a stack-distance model and keeps set invariants") {
  const CacheGeometry g = geom(4 * 1024, 64, 4);
  CacheArray c = array(g);
  oracle::StackLru ref(g.sets(), g.associativity, g.block_size);
  Rng rng(8);
  std::uint64_t agree = 0, last_fills = 0;
  for (int i = 0; i < 20000; ++i) {
    const Address a = rng.below(64 * 1024);
    const CoreOp op = rng.bernoulli(0.3) ? CoreOp::kWrite : CoreOp::kRead;
    auto r = c.lookup_and_update(op, a, 8, i);
    if (!r.hit) c.fill(op, a, 8, *r.victim, i);
    agree += r.hit == ref.access(a);
    CHECK(c.stats().fills >= last_fills);
    last_fills = c.stats().fills;
  }
  CHECK(agree == 20000);
  for (std::uint64_t s = 0; s < g.sets(); ++s) {
    std::set<std::uint64_t> tags, stamps;
    std::size_t valid = 0;
    for (const auto& l : c.set_lines(s)) {
      if (!l.valid()) continue;
      ++valid;
      tags.insert(l.tag);
      stamps.insert(l.lru_stamp);
      if (!is_dirty(l.state)) CHECK(l.dirty_word_mask == 0);
    }
    CHECK(tags.size() == valid);
    CHECK(stamps.size() == valid);
  }
  CHECK(c.stats().hits + c.stats().misses == c.stats().accesses());
  CHECK(c.stats().evictions <= c.stats().fills);
}

TEST_CASE("write counts never decrease") {
  auto p = tech("PCRAM");
  CacheArray c(geom(8 * 64, 64, 2), {p}, 1000, 0.5, Rng(2));
  Rng rng(3);
  std::vector<std::uint64_t> last(8, 0);
  for (int i = 0; i < 5000; ++i) {
    const Address a = rng.below(32) * 64;
    auto r = c.lookup_and_update(CoreOp::kWrite, a, 8, i);
    if (!r.hit) c.fill(CoreOp::kWrite, a, 8, *r.victim, i);
    for (std::uint64_t s = 0; s < 4; ++s)
      for (std::uint32_t w = 0; w < 2; ++w) {
        CHECK(c.line(s, w).write_count >= last[s * 2 + w]);
        last[s * 2 + w] = c.line(s, w).write_count;
      }
  }
}
