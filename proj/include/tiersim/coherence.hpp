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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tiersim/cache.hpp"

namespace tiersim::coherence {

using cache::LineState;

/// MOESI snooping protocol for one block across the caches on a bus.
enum class EventKind {
  kCoreRead,     ///< core c reads; bus read only when c holds no copy
  kCoreWrite,    ///< core c writes; upgrade or read-exclusive as needed
  kSnoopBusRd,   ///< cache c's read request observed on the bus
  kSnoopBusRdX,  ///< cache c's read-exclusive request observed on the bus
  kEvict,        ///< cache c drops its copy
};

struct Event {
  EventKind kind;
  std::size_t cache;
};

enum class BusAction {
  kBusRd,
  kBusRdX,
  kBusUpgr,
  kFlush,       ///< cache-to-cache data supply by `cache`
  kInvalidate,  ///< `cache` loses its copy
  kWriteback,   ///< dirty data from `cache` goes to the next level
};

struct BusMessage {
  BusAction action;
  std::size_t cache;

  bool operator==(const BusMessage&) const = default;
};

struct StepResult {
  std::vector<LineState> next;
  std::vector<BusMessage> actions;
  /// Cache supplying data to the requester, if any.
  std::optional<std::size_t> supplier;
  /// The requester needs the block from the next level.
  bool memory_supplies = false;
  bool uses_bus = false;
};

/// Applies one event to the global state of a block. Throws SimulationFault
/// when the input state already violates the protocol invariants.
StepResult step(std::span<const LineState> states, Event event);

/// Empty when the states are coherent: at most one M or E holder and, if
/// so, every other cache is I; at most one O, coexisting only with S or I.
std::optional<std::string> check_invariants(std::span<const LineState> states);

std::string to_string(std::span<const LineState> states);

}  // namespace tiersim::coherence
