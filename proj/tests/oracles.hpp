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

// Independent reference models used only by the tests.

#include <cstdint>
#include <list>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tiersim/cache.hpp"

namespace oracle {

struct Fraction {
  std::uint64_t num;
  std::uint64_t den;
};

/// Mean Manhattan distance by enumerating every ordered pair.
inline Fraction enumerate_mean_hops(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
  std::uint64_t total = 0, pairs = 0;
  for (std::uint32_t a = 0; a < x * y * z; ++a)
    for (std::uint32_t b = 0; b < x * y * z; ++b) {
      const std::int64_t ax = a % x, ay = a / x % y, az = a / (x * y);
      const std::int64_t bx = b % x, by = b / x % y, bz = b / (x * y);
      total += static_cast<std::uint64_t>(std::llabs(ax - bx) + std::llabs(ay - by) + std::llabs(az - bz));
      ++pairs;
    }
  const std::uint64_t g = std::gcd(total, pairs);
  return {total / g, pairs / g};
}

/// Level energy written out term by term.
inline double level_energy(double n_read, double e_read, double n_write, double e_set, double e_reset, double mix,
                  double idle_ns, double standby_mw_per_mib, double capacity_mib) {
  const double dynamic = n_read * e_read + n_write * (mix * e_set + (1.0 - mix) * e_reset);
  const double standby_mw = standby_mw_per_mib * capacity_mib;
  return dynamic + idle_ns * standby_mw / 1000.0;
}

/// LRU as a per-set recency stack: a hit is a reference whose stack
/// distance is below the associativity.
class StackLru {
 public:
  StackLru(std::uint64_t sets, std::uint32_t ways, std::uint64_t block) : stacks_(sets), ways_(ways), block_(block) {}

  bool access(std::uint64_t addr) {
    const std::uint64_t blk = addr / block_;
    auto& s = stacks_[blk % stacks_.size()];
    std::size_t depth = 0;
    auto it = s.begin();
    for (; it != s.end() && *it != blk; ++it) ++depth;
    const bool hit = it != s.end() && depth < ways_;
    if (it != s.end()) s.erase(it);
    s.push_front(blk);
    return hit;
  }

 private:
  std::vector<std::list<std::uint64_t>> stacks_;
  std::uint32_t ways_;
  std::uint64_t block_;
};

/// One flat memory: every write stores its value in each word it covers.
class FlatMemory {
 public:
  void write(std::uint64_t word_addr, std::uint64_t value) { words_[word_addr] = value; }
  std::uint64_t read(std::uint64_t word_addr) const {
    auto it = words_.find(word_addr);
    return it == words_.end() ? 0 : it->second;
  }

 private:
  std::unordered_map<std::uint64_t, std::uint64_t> words_;
};

/// MOESI global rules, counted directly.
inline std::optional<std::string> moesi_violation(const std::vector<tiersim::cache::LineState>& states) {
  using tiersim::cache::LineState;
  int m = 0, o = 0, e = 0, s = 0;
  for (auto st : states) {
    m += st == LineState::kM;
    o += st == LineState::kO;
    e += st == LineState::kE;
    s += st == LineState::kS;
  }
  if (m + e > 1) return "more than one M/E owner";
  if (m + e == 1 && o + s > 0) return "M/E owner alongside other copies";
  if (o > 1) return "more than one O";
  return std::nullopt;
}

}  // namespace oracle
