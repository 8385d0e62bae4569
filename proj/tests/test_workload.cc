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
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "tiersim/workload.hpp"

using namespace tiersim;
using namespace tiersim::workload;

TEST_CASE("trace line parsing") {
  const auto r = parse_trace_line("100,2,R,0x1f40,8", 1);
  REQUIRE(r);
  CHECK(*r == TraceRecord{100, 2, Op::kRead, 0x1f40, 8});
  CHECK_FALSE(parse_trace_line("# comment", 2).has_value());
  CHECK_FALSE(parse_trace_line("   ", 3).has_value());
  CHECK_THROWS_AS(parse_trace_line("100,2,X,0x1f40,8", 4), ParseError);
  CHECK_THROWS_AS(parse_trace_line("100,2,R,1f40,8", 5), ParseError);
  CHECK_THROWS_AS(parse_trace_line("100,2,R,0x1f40", 6), ParseError);
  CHECK_THROWS_AS(parse_trace_line("100,2,R,0x1f40,0", 7), ParseError);
  CHECK_THROWS_AS(parse_trace_line("1e2,2,R,0x1f40,8", 8), ParseError);
  CHECK_THROWS_AS(parse_trace_line("1,2,W,0x1000000000000,8", 9), ParseError);
  try {
    parse_trace_line("100,2,X,0x1f40,8", 42);
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 42);
  }
}

TEST_CASE("message line parsing") {
  const auto m = parse_message_line("5,0,3,256", 1);
  REQUIRE(m);
  CHECK(*m == MessageRecord{5, 0, 3, 256});
  CHECK_THROWS_AS(parse_message_line("5,1,1,256", 2), ParseError);
  CHECK_THROWS_AS(parse_message_line("5,1,2,0", 3), ParseError);
}

TEST_CASE("trace files need the header and ordered ticks") {
  std::istringstream ok("# made by hand\ntick,core,op,addr,size\n0,0,R,0x0,8\n\n3,1,W,0x40,8\n3,0,R,0x8,8\n");
  CHECK(read_trace(ok).size() == 3);
  std::istringstream no_header("0,0,R,0x0,8\n");
  CHECK_THROWS_AS(read_trace(no_header), ParseError);
  std::istringstream backwards("tick,core,op,addr,size\n5,0,R,0x0,8\n4,0,R,0x0,8\n");
  CHECK_THROWS_AS(read_trace(backwards), ParseError);
  CHECK_THROWS_AS(read_trace_file("/nonexistent/trace.csv"), ConfigError);
}

TEST_CASE("serialize then parse is the identity") {
  SyntheticTraceParams p;
  p.cores = 3;
  p.length = 500;
  p.seed = 4;
  const auto trace = gen_synthetic_trace(p);
  std::stringstream s;
  write_trace(s, trace);
  CHECK(read_trace(s) == trace);

  MessageTrafficParams m;
  m.clusters = 4;
  m.cycles = 5000;
  m.rate = 0.01;
  const auto msgs = gen_message_traffic(m);
  std::stringstream t;
  write_messages(t, msgs);
  CHECK(read_messages(t) == msgs);
}

TEST_CASE("a one-block hot set keeps every access in that block") {
  SyntheticTraceParams p;
  p.hot_fraction = 1.0;
  p.hot_set_bytes = 64;
  p.length = 1000;
  const auto trace = gen_synthetic_trace(p);
  const Address base = trace.front().addr / 64;
  for (const auto& r : trace) CHECK(r.addr / 64 == base);
}

TEST_CASE("measured hot fraction sits within three sigma") {
  SyntheticTraceParams p;
  p.hot_fraction = 0.9;
  p.hot_set_bytes = 16 * 1024;
  p.length = 100000;
  p.seed = 12;
  const auto trace = gen_synthetic_trace(p);
  const Address base = hot_set_base(p, 0);
  std::size_t hot = 0;
  for (const auto& r : trace) hot += r.addr >= base && r.addr < base + p.hot_set_bytes;
  const double frac = static_cast<double>(hot) / static_cast<double>(trace.size());
  CHECK(frac >= 0.89);
  CHECK(frac <= 0.91);
}

TEST_CASE("read/write ratio and disjoint hot sets") {
  SyntheticTraceParams p;
  p.cores = 4;
  p.length = 30000;
  p.hot_fraction = 1.0;
  const auto trace = gen_synthetic_trace(p);
  std::size_t reads = 0;
  for (const auto& r : trace) {
    reads += r.op == Op::kRead;
    const Address base = hot_set_base(p, r.core);
    CHECK(r.addr >= base);
    CHECK(r.addr < base + p.hot_set_bytes);
  }
  const double ratio = static_cast<double>(reads) / static_cast<double>(trace.size() - reads);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.05));
  for (std::uint32_t c = 1; c < 4; ++c) CHECK(hot_set_base(p, c) >= hot_set_base(p, c - 1) + p.hot_set_bytes);

  p.overlap = 1.0;
  for (std::uint32_t c = 1; c < 4; ++c) CHECK(hot_set_base(p, c) == hot_set_base(p, 0));
}

TEST_CASE("generators are pure functions of their inputs") {
  SyntheticTraceParams p;
  p.cores = 2;
  p.length = 2000;
  p.seed = 99;
  CHECK(gen_synthetic_trace(p) == gen_synthetic_trace(p));
  auto q = p;
  q.seed = 100;
  CHECK(gen_synthetic_trace(p) != gen_synthetic_trace(q));

  MessageTrafficParams m;
  m.clusters = 8;
  m.cycles = 10000;
  m.rate = 0.01;
  CHECK(gen_message_traffic(m) == gen_message_traffic(m));
}

TEST_CASE("message traffic") {
  MessageTrafficParams m;
  m.clusters = 64;
  m.cycles = 1000;
  m.rate = 0.0;
  CHECK(gen_message_traffic(m).empty());

  m.rate = 0.002;
  m.cycles = 1000000;
  const auto msgs = gen_message_traffic(m);
  const double n = 64.0 * 1e6, mean = n * 0.002, sigma = std::sqrt(n * 0.002 * 0.998);
  CHECK(mean == 128000.0);
  CHECK(std::abs(static_cast<double>(msgs.size()) - mean) <= 3 * sigma);
  for (const auto& r : msgs) {
    CHECK(r.src_cluster != r.dst_cluster);
    CHECK(r.dst_cluster < 64);
    CHECK(r.bytes == m.payload_bytes);
  }
}

TEST_CASE("injection counts across ten seeds") {
  MessageTrafficParams m;
  m.clusters = 16;
  m.cycles = 50000;
  m.rate = 0.005;
  const double n = 16.0 * 50000, mean = n * m.rate, sigma = std::sqrt(n * m.rate * (1 - m.rate));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    m.seed = seed;
    CHECK(std::abs(static_cast<double>(gen_message_traffic(m).size()) - mean) <= 3 * sigma);
  }
}

TEST_CASE("generator parameter checks") {
  SyntheticTraceParams p;
  p.hot_fraction = 1.5;
  CHECK_THROWS_AS(gen_synthetic_trace(p), ConfigError);
  MessageTrafficParams m;
  m.rate = -0.1;
  CHECK_FALSE(m.violations().empty());
}
