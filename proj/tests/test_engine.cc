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
#include <vector>

#include "doctest.h"
#include "tiersim/engine.hpp"
#include "tiersim/rng.hpp"

using namespace tiersim;
using namespace tiersim::engine;

namespace {

struct Recorder : Component {
  std::vector<std::uint32_t> kinds;
  std::vector<Picoseconds> times;
  Kernel* kernel = nullptr;
  void handle(const Event& e) override {
    kinds.push_back(e.kind);
    times.push_back(e.time);
  }
};

// Re-schedules itself a pseudo-random distance ahead.
struct Chatter : Component {
  Kernel& k;
  ComponentId id = 0;
  Rng rng;
  std::vector<std::pair<Picoseconds, std::uint64_t>> log;
  Chatter(Kernel& kernel, std::uint64_t seed) : k(kernel), rng(seed) { id = k.add(*this); }
  void handle(const Event& e) override {
    log.push_back({e.time, e.a});
    if (e.a < 2000) k.schedule(e.time + rng.below(5), id, 1, e.a + 1);
    if (e.a % 7 == 0 && e.a < 2000) k.schedule(e.time + rng.below(3), id, 2, e.a + 1000);
  }
};

}  // namespace

TEST_CASE("equal times dispatch in insertion order") {
  Kernel k;
  Recorder r;
  const auto id = k.add(r);
  k.schedule(10, id, 1);
  k.schedule(10, id, 2);
  k.schedule(5, id, 3);
  const RunStats s = k.run();
  CHECK(r.kinds == std::vector<std::uint32_t>{3, 1, 2});
  CHECK(s.dispatched == 3);
  CHECK(s.end_time == 10);
}

TEST_CASE("scheduling at the current time dispatches before time advances") {
  Kernel k;
  struct Now : Component {
    Kernel* k;
    ComponentId id;
    std::vector<Picoseconds> seen;
    void handle(const Event& e) override {
      seen.push_back(k->now());
      if (e.kind == 1) k->schedule(k->now(), id, 2);
    }
  } c;
  c.k = &k;
  c.id = k.add(c);
  k.schedule(7, c.id, 1);
  k.schedule(8, c.id, 3);
  k.run();
  CHECK(c.seen == std::vector<Picoseconds>{7, 7, 8});
}

TEST_CASE("scheduling into the past is a fault") {
  Kernel k;
  Recorder r;
  const auto id = k.add(r);
  k.schedule(10, id, 1);
  k.run();
  CHECK_THROWS_AS(k.schedule(9, id, 1), SimulationFault);
}

TEST_CASE("empty queue returns immediately") {
  Kernel k;
  const RunStats s = k.run_until(1000);
  CHECK(s.dispatched == 0);
}

TEST_CASE("run_until composes") {
  auto trace = [](bool split) {
    Kernel k;
    Chatter c(k, 42);
    k.schedule(0, c.id, 1, 0);
    if (split) {
      k.run_until(500);
      k.run_until(100000);
    } else {
      k.run_until(100000);
    }
    return c.log;
  };
  CHECK(trace(true) == trace(false));
}

TEST_CASE("identical seeds replay the same dispatch sequence") {
  auto trace = [](std::uint64_t seed) {
    Kernel k;
    Chatter c(k, seed);
    std::vector<std::uint64_t> seqs;
    k.set_dispatch_hook([&](const Event& e) { seqs.push_back(e.seq); });
    k.schedule(0, c.id, 1, 0);
    k.run();
    return std::make_pair(c.log, seqs);
  };
  CHECK(trace(9) == trace(9));
  CHECK(trace(9).first != trace(10).first);
}

TEST_CASE("time never decreases and every event is accounted for") {
  Kernel k;
  Chatter c(k, 3);
  Picoseconds last = 0;
  bool monotone = true;
  k.set_dispatch_hook([&](const Event& e) {
    monotone = monotone && e.time >= last;
    last = e.time;
  });
  k.schedule(0, c.id, 1, 0);
  k.run_until(300);
  CHECK(monotone);
  CHECK(k.scheduled_total() == k.dispatched_total() + k.pending());
  k.run();
  CHECK(k.pending() == 0);
  CHECK(k.scheduled_total() == k.dispatched_total());
}

TEST_CASE("latency to cycles") {
  CHECK(cycles_for_latency(2.5, 1000) == 3);
  CHECK(cycles_for_latency(2.0, 1000) == 2);
  CHECK(cycles_for_latency(0.0, 1000) == 0);
  CHECK(cycles_for_latency(3.5, 500) == 7);
  CHECK(cycles_for_latency(0.3, 1000) == 1);
}

TEST_CASE("clock edges") {
  Clock c(400);
  CHECK(c.to_time(3) == 1200);
  CHECK(c.cycle_at_or_after(0) == 0);
  CHECK(c.cycle_at_or_after(1) == 1);
  CHECK(c.cycle_at_or_after(800) == 2);
  CHECK(c.next_edge(801) == 1200);
}

TEST_CASE("rng sub-streams are reproducible and distinct") {
  Rng a(5, 1), b(5, 1), c(5, 2);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
  }
  Rng d(11);
  for (int i = 0; i < 1000; ++i) {
    CHECK(d.below(7) < 7);
    const double u = d.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
}
