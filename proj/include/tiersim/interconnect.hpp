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

#include <array>
#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tiersim/engine.hpp"
#include "tiersim/types.hpp"

namespace tiersim::interconnect {

struct Coord {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint32_t z = 0;

  auto operator<=>(const Coord&) const = default;
};

struct MeshDims {
  std::uint32_t x = 1;
  std::uint32_t y = 1;
  std::uint32_t z = 1;

  std::uint64_t nodes() const { return std::uint64_t{x} * y * z; }
  bool contains(Coord c) const { return c.x < x && c.y < y && c.z < z; }
  std::uint64_t index(Coord c) const { return c.x + std::uint64_t{x} * (c.y + std::uint64_t{y} * c.z); }
  Coord coord(std::uint64_t index) const;

  bool operator==(const MeshDims&) const = default;
};

/// Parses "XxYxZ"; throws ConfigError on anything else.
MeshDims parse_dims(std::string_view text);
std::string format_dims(const MeshDims& dims);

enum class Port : std::uint8_t { kPlusX, kMinusX, kPlusY, kMinusY, kPlusZ, kMinusZ, kLocal };
inline constexpr std::size_t kPortCount = 7;

std::string_view port_name(Port port);

/// Manhattan distance; throws std::domain_error for coordinates outside dims.
std::uint32_t hop_count(const MeshDims& dims, Coord src, Coord dst);

/// Dimension-order routing: X first, then Y, then Z; kLocal on arrival.
Port route_next_hop(Coord current, Coord dst);

Coord neighbor(Coord c, Port port);

/// Reduced non-negative fraction.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

Rational make_rational(std::uint64_t num, std::uint64_t den);

/// Mean Manhattan distance over all ordered (src, dst) pairs, self-pairs
/// included, computed exactly. Per axis of n nodes the mean |a - b| over n^2
/// pairs is (n^2 - 1) / (3n).
Rational mean_hop_count(const MeshDims& dims);

struct MeshTopology {
  MeshDims dims;
  Cycles link_latency = 1;
  Cycles tsv_latency = 1;
  Cycles router_delay = 1;
  std::uint32_t flit_width = 16;

  std::vector<std::string> violations() const;
  Cycles hop_latency(Port port) const;
};

enum class PacketKind : std::uint8_t { kMessage, kMemRequest, kMemResponse };

struct Packetization {
  std::uint32_t flits = 1;
  Cycles serialization = 1;
};

/// One header flit plus ceil(payload / flit_width) body flits, serialized
/// at one flit per cycle.
Packetization packetize(PacketKind kind, std::uint64_t payload, std::uint32_t flit_width);

struct Packet {
  std::uint64_t id = 0;
  Coord src;
  Coord dst;
  PacketKind kind = PacketKind::kMessage;
  std::uint64_t payload = 0;
  std::uint32_t flits = 1;
  Picoseconds t_inject = 0;
  std::optional<Picoseconds> t_deliver;
  Coord at;
  std::uint32_t hops = 0;
};

// --- cluster bus ------------------------------------------------------------

struct BusRequest {
  std::uint32_t requester = 0;
  std::uint64_t bytes = 0;
  std::uint64_t tag = 0;
  Cycles enqueued = 0;
};

/// One logical bus channel: FIFO grant queue, one grant per cycle, and a
/// transfer occupies the channel for ceil(bytes / beat_width) cycles.
class Channel {
 public:
  explicit Channel(std::uint32_t beat_width = 16);

  void enqueue(BusRequest request);

  /// Grants the head of the queue when the channel is free at `cycle`.
  std::optional<BusRequest> arbitrate(Cycles cycle);

  Cycles occupancy(std::uint64_t bytes) const;
  Cycles free_at() const { return free_at_; }
  bool empty() const { return queue_.empty(); }
  std::size_t size() const { return queue_.size(); }
  std::uint64_t grants() const { return grants_; }
  std::uint64_t busy_cycles() const { return busy_cycles_; }

 private:
  std::uint32_t beat_width_;
  std::deque<BusRequest> queue_;
  Cycles free_at_ = 0;
  std::uint64_t grants_ = 0;
  std::uint64_t busy_cycles_ = 0;
};

enum class BusChannel : std::uint8_t { kRequest = 0, kSnoop = 1, kResponse = 2 };

/// Intra-cluster coherent bus: request, snoop and response channels.
struct ClusterBus {
  explicit ClusterBus(std::uint32_t beat_width = 16, Picoseconds period = 1000)
      : channels{Channel(beat_width), Channel(beat_width), Channel(beat_width)}, clock(period) {}

  Channel& channel(BusChannel c) { return channels[static_cast<std::size_t>(c)]; }
  const Channel& channel(BusChannel c) const { return channels[static_cast<std::size_t>(c)]; }

  std::array<Channel, 3> channels;
  engine::Clock clock;
};

// --- mesh network -----------------------------------------------------------

/// Input-buffered mesh of routers with unbounded queues and XYZ routing.
/// A packet's head pays router_delay plus the link (or TSV) latency per hop;
/// each output port is held for the packet's flit count. At the destination
/// the packet is ejected after its flits serialize through the local port.
class MeshNetwork : public engine::Component {
 public:
  MeshNetwork(engine::Kernel& kernel, MeshTopology topology, Picoseconds clock_period);

  /// Schedules injection at the first clock edge at or after `time`.
  std::uint64_t inject(Picoseconds time, Coord src, Coord dst, PacketKind kind, std::uint64_t payload);

  void handle(const engine::Event& event) override;

  const MeshTopology& topology() const { return topo_; }
  const std::vector<Packet>& packets() const { return packets_; }
  std::uint64_t injected() const { return injected_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t in_flight() const { return injected_ - delivered_; }

  /// Zero-load latency in cycles between two nodes for a packet of `flits`.
  Cycles zero_load_latency(Coord src, Coord dst, std::uint32_t flits) const;

  std::function<void(const Packet&)> on_deliver;

 private:
  enum Kind : std::uint32_t { kArrive = 1, kDeliver = 2 };

  void arrive(Packet& p, Cycles cycle);

  engine::Kernel& kernel_;
  engine::ComponentId id_;
  MeshTopology topo_;
  engine::Clock clock_;
  std::vector<Packet> packets_;
  std::vector<Cycles> port_free_;
  std::uint64_t injected_ = 0;
  std::uint64_t delivered_ = 0;
};

}  // namespace tiersim::interconnect
