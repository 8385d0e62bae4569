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
#include <functional>
#include <queue>
#include <vector>

#include "tiersim/types.hpp"

namespace tiersim::engine {

using ComponentId = std::uint32_t;

/// A scheduled occurrence. (time, seq) totally orders all events; seq is
/// assigned by the kernel in insertion order.
struct Event {
  Picoseconds time = 0;
  std::uint64_t seq = 0;
  ComponentId target = 0;
  std::uint32_t kind = 0;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
};

class Component {
 public:
  virtual ~Component() = default;
  virtual void handle(const Event& event) = 0;
};

struct RunStats {
  std::uint64_t dispatched = 0;
  Picoseconds end_time = 0;
};

/// Single-threaded discrete-event kernel. Equal-time events dispatch in
/// insertion order.
class Kernel {
 public:
  /// Registers a non-owning component; it must outlive the kernel's use.
  ComponentId add(Component& component);

  /// Throws SimulationFault when time lies in the past.
  std::uint64_t schedule(Picoseconds time, ComponentId target, std::uint32_t kind,
                         std::uint64_t a = 0, std::uint64_t b = 0);

  /// Dispatches every event with time <= t_end, in (time, seq) order.
  RunStats run_until(Picoseconds t_end);

  /// Runs until the queue drains.
  RunStats run();

  Picoseconds now() const { return now_; }
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t scheduled_total() const { return next_seq_; }
  std::uint64_t dispatched_total() const { return dispatched_; }

  /// Observer invoked for every dispatched event, before its handler.
  void set_dispatch_hook(std::function<void(const Event&)> hook) { hook_ = std::move(hook); }

 private:
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      return x.time != y.time ? x.time > y.time : x.seq > y.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::vector<Component*> components_;
  std::function<void(const Event&)> hook_;
  Picoseconds now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
};

/// Whole clock cycles needed to cover a latency: ceil(latency * 1000 / period).
/// The latency is first resolved to whole picoseconds.
Cycles cycles_for_latency(double latency_ns, Picoseconds clock_period);

/// A clock domain with a fixed period in picoseconds.
class Clock {
 public:
  explicit Clock(Picoseconds period = 1000);

  Picoseconds period() const { return period_; }
  Picoseconds to_time(Cycles cycles) const { return cycles * period_; }
  /// First cycle whose edge is at or after t.
  Cycles cycle_at_or_after(Picoseconds t) const { return (t + period_ - 1) / period_; }
  Picoseconds next_edge(Picoseconds t) const { return to_time(cycle_at_or_after(t)); }

 private:
  Picoseconds period_;
};

}  // namespace tiersim::engine
