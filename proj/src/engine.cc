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

#include "tiersim/engine.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tiersim::engine {

ComponentId Kernel::add(Component& component) {
  components_.push_back(&component);
  return static_cast<ComponentId>(components_.size() - 1);
}

std::uint64_t Kernel::schedule(Picoseconds time, ComponentId target, std::uint32_t kind,
                               std::uint64_t a, std::uint64_t b) {
  if (time < now_)
    throw SimulationFault("event scheduled in the past: t=" + std::to_string(time) +
                          " now=" + std::to_string(now_));
  if (target >= components_.size())
    throw SimulationFault("event targets unknown component " + std::to_string(target));
  const std::uint64_t seq = next_seq_++;
  queue_.push(Event{time, seq, target, kind, a, b});
  return seq;
}

RunStats Kernel::run_until(Picoseconds t_end) {
  RunStats stats;
  while (!queue_.empty() && queue_.top().time <= t_end) {
    const Event ev = queue_.top();
    queue_.pop();
    now_ = ev.time;
    ++dispatched_;
    ++stats.dispatched;
    if (hook_) hook_(ev);
    components_[ev.target]->handle(ev);
  }
  stats.end_time = now_;
  return stats;
}

RunStats Kernel::run() { return run_until(std::numeric_limits<Picoseconds>::max()); }

Cycles cycles_for_latency(double latency_ns, Picoseconds clock_period) {
  if (clock_period == 0) throw std::domain_error("clock period must be > 0");
  if (!(latency_ns >= 0.0)) throw std::domain_error("latency must be >= 0");
  const auto ps = static_cast<std::uint64_t>(std::llround(latency_ns * 1000.0));
  return (ps + clock_period - 1) / clock_period;
}

Clock::Clock(Picoseconds period) : period_(period) {
  if (period_ == 0) throw std::domain_error("clock period must be > 0");
}

}  // namespace tiersim::engine
