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
#include <algorithm>

#include "doctest.h"
#include "oracles.hpp"
#include "tiersim/coherence.hpp"
#include "tiersim/rng.hpp"

using namespace tiersim;
using namespace tiersim::coherence;
using S = LineState;

namespace {

std::vector<S> states(std::string_view letters) {
  std::vector<S> out;
  for (char ch : letters) {
    switch (ch) {
      case 'M': out.push_back(S::kM); break;
      case 'O': out.push_back(S::kO); break;
      case 'E': out.push_back(S::kE); break;
      case 'S': out.push_back(S::kS); break;
      default: out.push_back(S::kI); break;
    }
  }
  return out;
}

std::size_t count(const StepResult& r, BusAction a) {
  return static_cast<std::size_t>(
      std::count_if(r.actions.begin(), r.actions.end(), [&](const BusMessage& m) { return m.action == a; }));
}

// Every coherent state vector over n caches.
std::vector<std::vector<S>> coherent_states(std::size_t n) {
  std::vector<std::vector<S>> out;
  std::vector<S> cur(n, S::kI);
  const S all[] = {S::kM, S::kO, S::kE, S::kS, S::kI};
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 5;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i, c /= 5) cur[i] = all[c % 5];
    if (!oracle::moesi_violation(cur)) out.push_back(cur);
  }
  return out;
}

}  // namespace

TEST_CASE("read miss with no other copy loads exclusive from memory") {
  const auto r = step(states("III"), {EventKind::kCoreRead, 0});
  CHECK(to_string(r.next) == "EII");
  CHECK(r.memory_supplies);
  CHECK_FALSE(r.supplier);
  CHECK(r.uses_bus);
}

TEST_CASE("read miss against a modified copy makes the owner O") {
  const auto r = step(states("MI"), {EventKind::kCoreRead, 1});
  CHECK(to_string(r.next) == "OS");
  CHECK(r.supplier == 0u);
  CHECK_FALSE(r.memory_supplies);
  CHECK(count(r, BusAction::kFlush) == 1);
}

TEST_CASE("write to a shared block invalidates the other sharer") {
  const auto r = step(states("SS"), {EventKind::kCoreWrite, 0});
  CHECK(to_string(r.next) == "MI");
  CHECK(count(r, BusAction::kInvalidate) == 1);
  CHECK(count(r, BusAction::kBusUpgr) == 1);
  CHECK_FALSE(r.memory_supplies);
}

TEST_CASE("write miss takes data from the owner and invalidates everyone") {
  const auto r = step(states("OSI"), {EventKind::kCoreWrite, 2});
  CHECK(to_string(r.next) == "IIM");
  CHECK(r.supplier == 0u);
  CHECK(count(r, BusAction::kInvalidate) == 2);
  CHECK(count(r, BusAction::kBusRdX) == 1);
}

TEST_CASE("hits stay off the bus") {
  CHECK_FALSE(step(states("SI"), {EventKind::kCoreRead, 0}).uses_bus);
  const auto w = step(states("EI"), {EventKind::kCoreWrite, 0});
  CHECK_FALSE(w.uses_bus);
  CHECK(to_string(w.next) == "MI");
}

TEST_CASE("evicting dirty data writes it back") {
  auto r = step(states("MI"), {EventKind::kEvict, 0});
  CHECK(to_string(r.next) == "II");
  CHECK(count(r, BusAction::kWriteback) == 1);
  r = step(states("SO"), {EventKind::kEvict, 1});
  CHECK(count(r, BusAction::kWriteback) == 1);
  r = step(states("EI"), {EventKind::kEvict, 0});
  CHECK(count(r, BusAction::kWriteback) == 0);
}

TEST_CASE("snooped requests act on the other caches") {
  auto r = step(states("MI"), {EventKind::kSnoopBusRd, 1});
  CHECK(to_string(r.next) == "OS");
  r = step(states("OS"), {EventKind::kSnoopBusRdX, 1});
  CHECK(to_string(r.next) == "IM");
}

TEST_CASE("incoherent input is a fault") {
  CHECK_THROWS_AS(step(states("MM"), {EventKind::kCoreRead, 0}), SimulationFault);
  CHECK_THROWS_AS(step(states("ES"), {EventKind::kCoreRead, 0}), SimulationFault);
  CHECK_THROWS_AS(step(states("OO"), {EventKind::kCoreRead, 0}), SimulationFault);
  CHECK(check_invariants(states("OSSI")) == std::nullopt);
  CHECK(check_invariants(states("MS")).has_value());
}

TEST_CASE("every event on every coherent state keeps the state coherent") {
  const EventKind kinds[] = {EventKind::kCoreRead, EventKind::kCoreWrite, EventKind::kSnoopBusRd,
                             EventKind::kSnoopBusRdX, EventKind::kEvict};
  for (const auto& st : coherent_states(4))
    for (EventKind k : kinds)
      for (std::size_t c = 0; c < st.size(); ++c) {
        const auto r = step(st, {k, c});
        CHECK_FALSE(oracle::moesi_violation(r.next));
        CHECK(check_invariants(r.next) == std::nullopt);
        if (k == EventKind::kCoreWrite || k == EventKind::kSnoopBusRdX) CHECK(r.next[c] == S::kM);
        if (k == EventKind::kCoreRead || k == EventKind::kSnoopBusRd) CHECK(r.next[c] != S::kI);
        if (k == EventKind::kEvict) CHECK(r.next[c] == S::kI);
        if (r.memory_supplies) CHECK(st[c] == S::kI);
        if (r.memory_supplies) {
          for (std::size_t i = 0; i < st.size(); ++i)
            if (i != c) CHECK_FALSE(cache::is_dirty(st[i]));
        }
      }
}

TEST_CASE("replayed values match a flat memory") {
  // Caches hold one value per block; reads must agree with a flat memory
  // updated in the same order.
  constexpr std::size_t kCaches = 4, kBlocks = 3;
  Rng rng(21);
  std::vector<std::vector<S>> st(kBlocks, std::vector<S>(kCaches, S::kI));
  std::vector<std::vector<std::uint64_t>> held(kBlocks, std::vector<std::uint64_t>(kCaches, 0));
  std::vector<std::uint64_t> memory(kBlocks, 0);
  oracle::FlatMemory flat;
  std::uint64_t next_value = 0;
  for (int i = 0; i < 20000; ++i) {
    const std::size_t b = rng.below(kBlocks), c = rng.below(kCaches);
    const int what = static_cast<int>(rng.below(3));
    if (what == 2) {
      const auto r = step(st[b], {EventKind::kEvict, c});
      if (count(r, BusAction::kWriteback)) memory[b] = held[b][c];
      st[b] = r.next;
      continue;
    }
    const bool write = what == 1;
    const auto r = step(st[b], {write ? EventKind::kCoreWrite : EventKind::kCoreRead, c});
    std::uint64_t data = held[b][c];
    if (r.supplier) data = held[b][*r.supplier];
    else if (r.memory_supplies) data = memory[b];
    st[b] = r.next;
    held[b][c] = data;
    if (write) {
      held[b][c] = ++next_value;
      flat.write(b, next_value);
    } else {
      REQUIRE(data == flat.read(b));
    }
    REQUIRE_FALSE(oracle::moesi_violation(st[b]));
  }
}
