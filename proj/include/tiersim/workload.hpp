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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tiersim/types.hpp"

namespace tiersim::workload {

enum class Op : std::uint8_t { kRead, kWrite };

/// One per-core memory access. `tick` is the earliest issue cycle on the
/// core clock.
struct TraceRecord {
  std::uint64_t tick = 0;
  std::uint32_t core = 0;
  Op op = Op::kRead;
  Address addr = 0;
  std::uint32_t size = 8;

  bool operator==(const TraceRecord&) const = default;
};

/// One inter-cluster message; `tick` is on the NoC clock.
struct MessageRecord {
  std::uint64_t tick = 0;
  std::uint32_t src_cluster = 0;
  std::uint32_t dst_cluster = 0;
  std::uint64_t bytes = 0;

  bool operator==(const MessageRecord&) const = default;
};

inline constexpr std::string_view kTraceHeader = "tick,core,op,addr,size";
inline constexpr std::string_view kMessageHeader = "tick,src_cluster,dst_cluster,bytes";

/// Parses `tick,core,op,addr,size`. Returns nullopt for blank and
/// '#'-prefixed lines; throws ParseError (tagged with line_no) otherwise.
std::optional<TraceRecord> parse_trace_line(std::string_view line, std::size_t line_no = 0);
std::optional<MessageRecord> parse_message_line(std::string_view line, std::size_t line_no = 0);

std::string format_trace_line(const TraceRecord& r);
std::string format_message_line(const MessageRecord& r);

/// Reads a whole trace. The first non-comment line must be the header.
/// Per-core ticks must be non-decreasing.
std::vector<TraceRecord> read_trace(std::istream& in);
std::vector<TraceRecord> read_trace_file(const std::filesystem::path& path);
std::vector<MessageRecord> read_messages(std::istream& in);
std::vector<MessageRecord> read_messages_file(const std::filesystem::path& path);

void write_trace(std::ostream& out, const std::vector<TraceRecord>& trace);
void write_messages(std::ostream& out, const std::vector<MessageRecord>& messages);

struct SyntheticTraceParams {
  std::uint32_t cores = 1;
  /// Accesses per core.
  std::uint64_t length = 1000;
  double hot_fraction = 0.9;
  std::uint64_t hot_set_bytes = 32 * 1024;
  std::uint64_t seed = 1;
  /// Reads per write; 2.0 means 2:1.
  double read_write_ratio = 2.0;
  /// 0 keeps per-core hot sets disjoint, 1 makes every core share one.
  double overlap = 0.0;
  std::uint64_t address_space_bytes = kAddressLimit;
  std::uint32_t access_size = 8;
  /// Core cycles between consecutive accesses of one core.
  std::uint64_t tick_stride = 1;

  std::vector<std::string> violations() const;
};

/// Base address of core `core`'s hot set.
Address hot_set_base(const SyntheticTraceParams& params, std::uint32_t core);

/// Records are ordered by (tick, core). Pure function of the parameters.
std::vector<TraceRecord> gen_synthetic_trace(const SyntheticTraceParams& params);

struct MessageTrafficParams {
  std::uint32_t clusters = 2;
  std::uint64_t cycles = 1000;
  double rate = 0.001;
  std::uint64_t payload_bytes = 64;
  std::uint64_t seed = 1;

  std::vector<std::string> violations() const;
};

/// Bernoulli injection per cluster per cycle with uniform destinations
/// among the other clusters. Ordered by (tick, src_cluster).
std::vector<MessageRecord> gen_message_traffic(const MessageTrafficParams& params);

}  // namespace tiersim::workload
