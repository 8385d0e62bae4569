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

#include "tiersim/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "tiersim/rng.hpp"

namespace tiersim::workload {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, const char* name, std::size_t line_no, int base = 10) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value, base);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(std::string("malformed ") + name + " '" + std::string(field) + "'", line_no);
  return value;
}

std::string hex(Address a) {
  std::ostringstream s;
  s << "0x" << std::hex << a;
  return s.str();
}

template <typename Record, typename Parse>
std::vector<Record> read_records(std::istream& in, std::string_view header, Parse parse) {
  std::vector<Record> out;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    if (!seen_header) {
      if (trim(line) != header)
        throw ParseError("expected header '" + std::string(header) + "'", line_no);
      seen_header = true;
      continue;
    }
    if (auto r = parse(line, line_no)) out.push_back(*r);
  }
  if (!seen_header) throw ParseError("missing header '" + std::string(header) + "'", line_no);
  return out;
}

}  // namespace

std::optional<TraceRecord> parse_trace_line(std::string_view line, std::size_t line_no) {
  if (skippable(line)) return std::nullopt;
  const auto f = split_fields(line);
  if (f.size() != 5) throw ParseError("expected 5 fields, got " + std::to_string(f.size()), line_no);
  TraceRecord r;
  r.tick = parse_number<std::uint64_t>(f[0], "tick", line_no);
  r.core = parse_number<std::uint32_t>(f[1], "core", line_no);
  if (f[2] == "R")
    r.op = Op::kRead;
  else if (f[2] == "W")
    r.op = Op::kWrite;
  else
    throw ParseError("op must be R or W, got '" + std::string(f[2]) + "'", line_no);
  if (f[3].size() < 3 || (f[3].substr(0, 2) != "0x" && f[3].substr(0, 2) != "0X"))
    throw ParseError("addr must be hex with 0x prefix, got '" + std::string(f[3]) + "'", line_no);
  r.addr = parse_number<Address>(f[3].substr(2), "addr", line_no, 16);
  if (r.addr >= kAddressLimit) throw ParseError("addr exceeds 48 bits", line_no);
  r.size = parse_number<std::uint32_t>(f[4], "size", line_no);
  if (r.size == 0) throw ParseError("size must be > 0", line_no);
  return r;
}

std::optional<MessageRecord> parse_message_line(std::string_view line, std::size_t line_no) {
  if (skippable(line)) return std::nullopt;
  const auto f = split_fields(line);
  if (f.size() != 4) throw ParseError("expected 4 fields, got " + std::to_string(f.size()), line_no);
  MessageRecord r;
  r.tick = parse_number<std::uint64_t>(f[0], "tick", line_no);
  r.src_cluster = parse_number<std::uint32_t>(f[1], "src_cluster", line_no);
  r.dst_cluster = parse_number<std::uint32_t>(f[2], "dst_cluster", line_no);
  r.bytes = parse_number<std::uint64_t>(f[3], "bytes", line_no);
  if (r.src_cluster == r.dst_cluster) throw ParseError("src_cluster equals dst_cluster", line_no);
  if (r.bytes == 0) throw ParseError("bytes must be > 0", line_no);
  return r;
}

std::string format_trace_line(const TraceRecord& r) {
  return std::to_string(r.tick) + "," + std::to_string(r.core) + "," + (r.op == Op::kRead ? "R" : "W") + "," +
         hex(r.addr) + "," + std::to_string(r.size);
}

std::string format_message_line(const MessageRecord& r) {
  return std::to_string(r.tick) + "," + std::to_string(r.src_cluster) + "," + std::to_string(r.dst_cluster) + "," +
         std::to_string(r.bytes);
}

std::vector<TraceRecord> read_trace(std::istream& in) {
  std::unordered_map<std::uint32_t, std::uint64_t> last_tick;
  return read_records<TraceRecord>(in, kTraceHeader, [&](std::string_view line, std::size_t line_no) {
    auto r = parse_trace_line(line, line_no);
    if (r) {
      auto [it, fresh] = last_tick.try_emplace(r->core, r->tick);
      if (!fresh && r->tick < it->second)
        throw ParseError("tick decreases for core " + std::to_string(r->core), line_no);
      it->second = r->tick;
    }
    return r;
  });
}

std::vector<TraceRecord> read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file '" + path.string() + "'");
  return read_trace(in);
}

std::vector<MessageRecord> read_messages(std::istream& in) {
  return read_records<MessageRecord>(in, kMessageHeader, parse_message_line);
}

std::vector<MessageRecord> read_messages_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open message file '" + path.string() + "'");
  return read_messages(in);
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace) out << format_trace_line(r) << '\n';
}

void write_messages(std::ostream& out, const std::vector<MessageRecord>& messages) {
  out << kMessageHeader << '\n';
  for (const auto& r : messages) out << format_message_line(r) << '\n';
}

std::vector<std::string> SyntheticTraceParams::violations() const {
  std::vector<std::string> out;
  if (cores == 0) out.emplace_back("cores must be >= 1");
  if (!(hot_fraction >= 0.0 && hot_fraction <= 1.0)) out.emplace_back("hot_fraction outside [0, 1]");
  if (!(overlap >= 0.0 && overlap <= 1.0)) out.emplace_back("overlap outside [0, 1]");
  if (access_size == 0) out.emplace_back("access_size must be > 0");
  if (hot_set_bytes < access_size) out.emplace_back("hot_set_bytes must be >= access_size");
  if (!(read_write_ratio >= 0.0)) out.emplace_back("read_write_ratio must be >= 0");
  if (address_space_bytes < access_size || address_space_bytes > kAddressLimit)
    out.emplace_back("address_space_bytes outside [access_size, 2^48]");
  else if (cores > 0 && hot_set_base(*this, cores - 1) + hot_set_bytes > address_space_bytes)
    out.emplace_back("hot sets do not fit the address space");
  return out;
}

Address hot_set_base(const SyntheticTraceParams& params, std::uint32_t core) {
  const double stride = static_cast<double>(params.hot_set_bytes) * (1.0 - params.overlap);
  const auto raw = static_cast<Address>(std::floor(stride * core));
  return raw - raw % 64;
}

std::vector<TraceRecord> gen_synthetic_trace(const SyntheticTraceParams& params) {
  if (auto v = params.violations(); !v.empty()) throw ConfigError("synthetic trace: " + v.front());
  const double write_probability = 1.0 / (1.0 + params.read_write_ratio);
  const std::uint64_t hot_slots = params.hot_set_bytes / params.access_size;
  const std::uint64_t all_slots = params.address_space_bytes / params.access_size;
  std::vector<TraceRecord> out;
  out.reserve(params.cores * params.length);
  std::vector<Rng> rngs;
  for (std::uint32_t c = 0; c < params.cores; ++c) rngs.emplace_back(params.seed, c);
  for (std::uint64_t i = 0; i < params.length; ++i) {
    for (std::uint32_t c = 0; c < params.cores; ++c) {
      Rng& rng = rngs[c];
      TraceRecord r;
      r.tick = i * params.tick_stride;
      r.core = c;
      r.size = params.access_size;
      if (rng.bernoulli(params.hot_fraction))
        r.addr = hot_set_base(params, c) + rng.below(hot_slots) * params.access_size;
      else
        r.addr = rng.below(all_slots) * params.access_size;
      r.op = rng.bernoulli(write_probability) ? Op::kWrite : Op::kRead;
      out.push_back(r);
    }
  }
  return out;
}

std::vector<std::string> MessageTrafficParams::violations() const {
  std::vector<std::string> out;
  if (!(rate >= 0.0 && rate <= 1.0)) out.emplace_back("rate outside [0, 1]");
  if (rate > 0.0 && clusters < 2) out.emplace_back("message traffic needs at least two clusters");
  if (payload_bytes == 0) out.emplace_back("payload_bytes must be > 0");
  return out;
}

std::vector<MessageRecord> gen_message_traffic(const MessageTrafficParams& params) {
  if (auto v = params.violations(); !v.empty()) throw ConfigError("message traffic: " + v.front());
  std::vector<MessageRecord> out;
  if (params.rate == 0.0) return out;
  std::vector<Rng> rngs;
  for (std::uint32_t c = 0; c < params.clusters; ++c) rngs.emplace_back(params.seed, c);
  for (std::uint64_t t = 0; t < params.cycles; ++t) {
    for (std::uint32_t c = 0; c < params.clusters; ++c) {
      Rng& rng = rngs[c];
      if (!rng.bernoulli(params.rate)) continue;
      auto dst = static_cast<std::uint32_t>(rng.below(params.clusters - 1));
      if (dst >= c) ++dst;
      out.push_back({t, c, dst, params.payload_bytes});
    }
  }
  return out;
}

}  // namespace tiersim::workload
