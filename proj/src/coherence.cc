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

#include "tiersim/coherence.hpp"

#include <stdexcept>

#include "tiersim/types.hpp"

namespace tiersim::coherence {

namespace {

StepResult bus_read(std::span<const LineState> states, std::size_t requester) {
  StepResult r;
  r.next.assign(states.begin(), states.end());
  r.uses_bus = true;
  r.actions.push_back({BusAction::kBusRd, requester});
  bool others_valid = false;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i == requester) continue;
    switch (states[i]) {
      case LineState::kM:
        r.next[i] = LineState::kO;
        r.supplier = i;
        others_valid = true;
        break;
      case LineState::kO:
        r.supplier = i;
        others_valid = true;
        break;
      case LineState::kE:
        r.next[i] = LineState::kS;
        if (!r.supplier) r.supplier = i;
        others_valid = true;
        break;
      case LineState::kS:
        others_valid = true;
        break;
      case LineState::kI:
        break;
    }
  }
  if (r.supplier) r.actions.push_back({BusAction::kFlush, *r.supplier});
  r.memory_supplies = !r.supplier;
  r.next[requester] = others_valid ? LineState::kS : LineState::kE;
  return r;
}

StepResult bus_read_exclusive(std::span<const LineState> states, std::size_t requester, bool upgrade) {
  StepResult r;
  r.next.assign(states.begin(), states.end());
  r.uses_bus = true;
  r.actions.push_back({upgrade ? BusAction::kBusUpgr : BusAction::kBusRdX, requester});
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i == requester || states[i] == LineState::kI) continue;
    if (!upgrade && !r.supplier && states[i] != LineState::kS) r.supplier = i;
    if (!upgrade && (states[i] == LineState::kM || states[i] == LineState::kO)) r.supplier = i;
    r.actions.push_back({BusAction::kInvalidate, i});
    r.next[i] = LineState::kI;
  }
  if (r.supplier) r.actions.insert(r.actions.begin() + 1, {BusAction::kFlush, *r.supplier});
  r.memory_supplies = !upgrade && !r.supplier;
  r.next[requester] = LineState::kM;
  return r;
}

}  // namespace

std::optional<std::string> check_invariants(std::span<const LineState> states) {
  std::size_t exclusive = 0, owned = 0, valid = 0;
  for (LineState s : states) {
    if (s == LineState::kM || s == LineState::kE) ++exclusive;
    if (s == LineState::kO) ++owned;
    if (s != LineState::kI) ++valid;
  }
  if (exclusive > 1) return "more than one M/E holder: " + to_string(states);
  if (exclusive == 1 && valid > 1) return "M/E holder coexists with other copies: " + to_string(states);
  if (owned > 1) return "more than one O holder: " + to_string(states);
  return std::nullopt;
}

std::string to_string(std::span<const LineState> states) {
  std::string out;
  for (LineState s : states) out.push_back(cache::state_letter(s));
  return out;
}

StepResult step(std::span<const LineState> states, Event event) {
  if (event.cache >= states.size()) throw std::out_of_range("coherence event names an unknown cache");
  if (auto bad = check_invariants(states)) throw SimulationFault("incoherent input state: " + *bad);
  const LineState own = states[event.cache];
  // A bus request from a cache that already holds the block behaves like
  // the corresponding core access.
  if (own != LineState::kI && event.kind == EventKind::kSnoopBusRd) event.kind = EventKind::kCoreRead;
  if (own != LineState::kI && event.kind == EventKind::kSnoopBusRdX) event.kind = EventKind::kCoreWrite;
  switch (event.kind) {
    case EventKind::kCoreRead:
      if (own != LineState::kI) {
        StepResult r;
        r.next.assign(states.begin(), states.end());
        return r;
      }
      return bus_read(states, event.cache);
    case EventKind::kSnoopBusRd:
      return bus_read(states, event.cache);
    case EventKind::kCoreWrite:
      if (own == LineState::kM || own == LineState::kE) {
        StepResult r;
        r.next.assign(states.begin(), states.end());
        r.next[event.cache] = LineState::kM;
        return r;
      }
      return bus_read_exclusive(states, event.cache, own == LineState::kS || own == LineState::kO);
    case EventKind::kSnoopBusRdX:
      return bus_read_exclusive(states, event.cache, false);
    case EventKind::kEvict: {
      StepResult r;
      r.next.assign(states.begin(), states.end());
      if (cache::is_dirty(own)) {
        r.actions.push_back({BusAction::kWriteback, event.cache});
        r.uses_bus = true;
      }
      r.next[event.cache] = LineState::kI;
      return r;
    }
  }
  throw std::logic_error("bad coherence event");
}

}  // namespace tiersim::coherence
