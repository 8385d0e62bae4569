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

#include "tiersim/interconnect.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <stdexcept>

namespace tiersim::interconnect {

Coord MeshDims::coord(std::uint64_t index) const {
  return {static_cast<std::uint32_t>(index % x), static_cast<std::uint32_t>((index / x) % y),
          static_cast<std::uint32_t>(index / (std::uint64_t{x} * y))};
}

MeshDims parse_dims(std::string_view text) {
  std::array<std::uint32_t, 3> v{};
  std::size_t pos = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (i > 0) {
      if (pos >= text.size() || (text[pos] != 'x' && text[pos] != 'X'))
        throw ConfigError("dims must look like XxYxZ, got '" + std::string(text) + "'");
      ++pos;
    }
    const char* begin = text.data() + pos;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v[i]);
    if (ec != std::errc() || ptr == begin || v[i] == 0)
      throw ConfigError("dims must be positive integers XxYxZ, got '" + std::string(text) + "'");
    pos = static_cast<std::size_t>(ptr - text.data());
  }
  if (pos != text.size()) throw ConfigError("trailing characters in dims '" + std::string(text) + "'");
  return {v[0], v[1], v[2]};
}

std::string format_dims(const MeshDims& d) {
  return std::to_string(d.x) + "x" + std::to_string(d.y) + "x" + std::to_string(d.z);
}

std::string_view port_name(Port port) {
  static constexpr std::array<std::string_view, kPortCount> names = {"+X", "-X", "+Y", "-Y", "+Z", "-Z", "local"};
  return names[static_cast<std::size_t>(port)];
}

std::uint32_t hop_count(const MeshDims& dims, Coord src, Coord dst) {
  if (!dims.contains(src) || !dims.contains(dst)) throw std::domain_error("coordinate outside the mesh");
  auto dist = [](std::uint32_t a, std::uint32_t b) { return a > b ? a - b : b - a; };
  return dist(src.x, dst.x) + dist(src.y, dst.y) + dist(src.z, dst.z);
}

Port route_next_hop(Coord current, Coord dst) {
  if (current.x != dst.x) return current.x < dst.x ? Port::kPlusX : Port::kMinusX;
  if (current.y != dst.y) return current.y < dst.y ? Port::kPlusY : Port::kMinusY;
  if (current.z != dst.z) return current.z < dst.z ? Port::kPlusZ : Port::kMinusZ;
  return Port::kLocal;
}

Coord neighbor(Coord c, Port port) {
  switch (port) {
    case Port::kPlusX: ++c.x; break;
    case Port::kMinusX: --c.x; break;
    case Port::kPlusY: ++c.y; break;
    case Port::kMinusY: --c.y; break;
    case Port::kPlusZ: ++c.z; break;
    case Port::kMinusZ: --c.z; break;
    case Port::kLocal: break;
  }
  return c;
}

Rational make_rational(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw std::domain_error("zero denominator");
  const std::uint64_t g = std::gcd(num, den);
  return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

Rational mean_hop_count(const MeshDims& dims) {
  // Sum of (n^2 - 1) / (3n) over the three axes, over a common denominator.
  const std::array<std::uint64_t, 3> n = {dims.x, dims.y, dims.z};
  Rational total{0, 1};
  for (std::uint64_t k : n) {
    const Rational axis = make_rational(k * k - 1, 3 * k);
    const std::uint64_t den = std::lcm(total.den, axis.den);
    total = make_rational(total.num * (den / total.den) + axis.num * (den / axis.den), den);
  }
  return total;
}

std::vector<std::string> MeshTopology::violations() const {
  std::vector<std::string> out;
  if (dims.x < 1 || dims.y < 1 || dims.z < 1) out.emplace_back("mesh dims must be >= 1");
  if (link_latency < 1) out.emplace_back("link_latency must be >= 1 cycle");
  if (tsv_latency < 1) out.emplace_back("tsv_latency must be >= 1 cycle");
  if (router_delay < 1) out.emplace_back("router_delay must be >= 1 cycle");
  if (flit_width == 0) out.emplace_back("flit_width must be > 0");
  return out;
}

Cycles MeshTopology::hop_latency(Port port) const {
  return (port == Port::kPlusZ || port == Port::kMinusZ) ? tsv_latency : link_latency;
}

Packetization packetize(PacketKind kind, std::uint64_t payload, std::uint32_t flit_width) {
  (void)kind;
  if (flit_width == 0) throw std::domain_error("flit_width must be > 0");
  const auto flits = static_cast<std::uint32_t>(1 + (payload + flit_width - 1) / flit_width);
  return {flits, flits};
}

Channel::Channel(std::uint32_t beat_width) : beat_width_(beat_width) {
  if (beat_width_ == 0) throw std::domain_error("beat width must be > 0");
}

void Channel::enqueue(BusRequest request) { queue_.push_back(request); }

std::optional<BusRequest> Channel::arbitrate(Cycles cycle) {
  if (queue_.empty() || cycle < free_at_ || queue_.front().enqueued > cycle) return std::nullopt;
  BusRequest granted = queue_.front();
  queue_.pop_front();
  const Cycles occ = occupancy(granted.bytes);
  free_at_ = cycle + occ;
  busy_cycles_ += occ;
  ++grants_;
  return granted;
}

Cycles Channel::occupancy(std::uint64_t bytes) const {
  return std::max<Cycles>(1, (bytes + beat_width_ - 1) / beat_width_);
}

MeshNetwork::MeshNetwork(engine::Kernel& kernel, MeshTopology topology, Picoseconds clock_period)
    : kernel_(kernel), id_(kernel.add(*this)), topo_(topology), clock_(clock_period) {
  if (auto v = topo_.violations(); !v.empty()) throw ConfigError("invalid mesh: " + v.front());
  port_free_.assign(topo_.dims.nodes() * kPortCount, 0);
}

std::uint64_t MeshNetwork::inject(Picoseconds time, Coord src, Coord dst, PacketKind kind, std::uint64_t payload) {
  if (!topo_.dims.contains(src) || !topo_.dims.contains(dst)) throw std::domain_error("packet endpoint outside the mesh");
  Packet p;
  p.id = packets_.size();
  p.src = src;
  p.dst = dst;
  p.kind = kind;
  p.payload = payload;
  p.flits = packetize(kind, payload, topo_.flit_width).flits;
  p.t_inject = clock_.next_edge(time);
  p.at = src;
  packets_.push_back(p);
  ++injected_;
  kernel_.schedule(p.t_inject, id_, kArrive, p.id);
  return p.id;
}

void MeshNetwork::handle(const engine::Event& event) {
  Packet& p = packets_.at(event.a);
  switch (event.kind) {
    case kArrive:
      arrive(p, clock_.cycle_at_or_after(event.time));
      break;
    case kDeliver:
      p.t_deliver = event.time;
      ++delivered_;
      if (on_deliver) on_deliver(p);
      break;
    default:
      throw SimulationFault("mesh received unknown event kind");
  }
}

void MeshNetwork::arrive(Packet& p, Cycles cycle) {
  const Port port = route_next_hop(p.at, p.dst);
  Cycles& free = port_free_[topo_.dims.index(p.at) * kPortCount + static_cast<std::size_t>(port)];
  if (port == Port::kLocal) {
    const Cycles depart = std::max(cycle, free);
    free = depart + p.flits;
    kernel_.schedule(clock_.to_time(depart + p.flits), id_, kDeliver, p.id);
    return;
  }
  const Cycles depart = std::max(cycle + topo_.router_delay, free);
  free = depart + p.flits;
  p.at = neighbor(p.at, port);
  ++p.hops;
  kernel_.schedule(clock_.to_time(depart + topo_.hop_latency(port)), id_, kArrive, p.id);
}

Cycles MeshNetwork::zero_load_latency(Coord src, Coord dst, std::uint32_t flits) const {
  Cycles total = flits;
  for (Coord c = src; c != dst;) {
    const Port port = route_next_hop(c, dst);
    total += topo_.router_delay + topo_.hop_latency(port);
    c = neighbor(c, port);
  }
  return total;
}

}  // namespace tiersim::interconnect
