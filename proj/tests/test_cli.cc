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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "tiersim/cli.hpp"

using namespace tiersim;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result tool(std::vector<std::string> args) {
  args.insert(args.begin(), "tiersim");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tiersim_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json small_config() {
  json cfg = arch::preset_run_config("fig32");
  cfg["workload"]["synthetic"]["length"] = 200;
  return cfg;
}

fs::path write_json(const fs::path& p, const json& j) {
  std::ofstream(p) << j.dump(2);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

json strip_timestamp(json j) {
  j["meta"].erase("timestamp");
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("hops prints the exact mean") {
  CHECK(tool({"hops", "--dims", "8x8x1"}).out == "5.2500\n");
  CHECK(tool({"hops", "--dims", "4x4x4"}).out == "3.7500\n");
  CHECK(tool({"hops", "--dims", "1x1x1"}).out == "0.0000\n");
  CHECK(tool({"hops", "--dims", "8x8"}).code == cli::kExitConfig);
  CHECK(tool({"hops", "--dims", "0x2x2"}).code == cli::kExitConfig);
}

TEST_CASE("run writes a report") {
  const fs::path dir = scratch("run");
  const fs::path cfg = write_json(dir / "c.json", small_config());
  const auto r = tool({"run", "--config", cfg.string(), "--out", (dir / "r.json").string()});
  CHECK(r.code == cli::kExitOk);
  const json rep = read_json(dir / "r.json");
  CHECK(rep["seed"] == 1);
  CHECK(rep["config"]["workload"]["synthetic"]["length"] == 200);
  CHECK(rep["duration_ps"].get<std::uint64_t>() > 0);
}

TEST_CASE("bad configs exit with 2 and explain on stderr") {
  const fs::path dir = scratch("bad");
  json cfg = small_config();
  cfg["system"]["l1d"]["block_size"] = 48;
  auto r = tool({"run", "--config", write_json(dir / "c.json", cfg).string(), "--out", (dir / "r.json").string()});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("block_size not a power of two") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "r.json"));

  cfg = small_config();
  cfg["workload"] = {{"traces", {"missing.csv"}}};
  r = tool({"run", "--config", write_json(dir / "c2.json", cfg).string(), "--out", (dir / "r.json").string()});
  CHECK(r.code == cli::kExitConfig);
  CHECK_FALSE(r.err.empty());

  r = tool({"run", "--config", (dir / "absent.json").string()});
  CHECK(r.code == cli::kExitConfig);

  std::ofstream(dir / "broken.json") << "{ not json";
  r = tool({"validate", "--config", (dir / "broken.json").string()});
  CHECK(r.code == cli::kExitConfig);
}

TEST_CASE("trace files resolve against the config directory") {
  const fs::path dir = scratch("trace");
  std::ofstream(dir / "t.csv") << "tick,core,op,addr,size\n0,0,W,0x40,8\n2,1,R,0x40,8\n";
  json cfg = small_config();
  cfg["workload"] = {{"traces", {"t.csv"}}};
  const auto r = tool({"run", "--config", write_json(dir / "c.json", cfg).string(), "--out", (dir / "r.json").string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(read_json(dir / "r.json")["latency"]["read"]["count"] == 1);

  std::ofstream(dir / "bad.csv") << "tick,core,op,addr,size\n5,0,R,0x40,8\n1,0,R,0x40,8\n";
  cfg["workload"] = {{"traces", {"bad.csv"}}};
  const auto bad = tool({"run", "--config", write_json(dir / "c.json", cfg).string()});
  CHECK(bad.code == cli::kExitConfig);
  CHECK(bad.err.find("3") != std::string::npos);
}

TEST_CASE("--set matches editing the file") {
  const fs::path dir = scratch("set");
  const fs::path base = write_json(dir / "base.json", small_config());
  json edited = small_config();
  edited["system"]["l2"]["tech"] = "MRAM";
  edited["seed"] = 7;
  const fs::path ed = write_json(dir / "edited.json", edited);
  REQUIRE(tool({"run", "--config", base.string(), "--set", "l2.tech=MRAM", "--seed", "7", "--out",
                (dir / "a.json").string()})
              .code == 0);
  REQUIRE(tool({"run", "--config", ed.string(), "--out", (dir / "b.json").string()}).code == 0);
  CHECK(strip_timestamp(read_json(dir / "a.json")) == strip_timestamp(read_json(dir / "b.json")));
}

TEST_CASE("dotted paths") {
  json cfg = small_config();
  cli::set_path(cfg, "l2.capacity", 65536);
  CHECK(cfg["system"]["l2"]["capacity"] == 65536);
  cli::set_path(cfg, "seed", 3);
  CHECK(cfg["seed"] == 3);
  cli::apply_override(cfg, "system.l2.tech=PCRAM");
  CHECK(cfg["system"]["l2"]["tech"] == "PCRAM");
  cli::apply_override(cfg, "workload.synthetic.overlap=0.5");
  CHECK(cfg["workload"]["synthetic"]["overlap"] == 0.5);
  CHECK_THROWS_AS(cli::set_path(cfg, "nothing.here", 1), ConfigError);
  CHECK_THROWS_AS(cli::apply_override(cfg, "no_equals_sign"), ConfigError);
  CHECK(cli::parse_value("12") == 12);
  CHECK(cli::parse_value("true") == true);
  CHECK(cli::parse_value("SRAM") == "SRAM");
  CHECK(cli::parse_value("[1,2]") == json::array({1, 2}));
}

TEST_CASE("sweep writes one report per value and a summary") {
  const fs::path dir = scratch("sweep");
  const fs::path cfg = write_json(dir / "c.json", small_config());
  const auto r = tool({"sweep", "--config", cfg.string(), "--param", "l2.tech", "--values", "SRAM,MRAM,PCRAM", "--out",
                       (dir / "out").string()});
  REQUIRE(r.code == 0);
  for (const char* v : {"SRAM", "MRAM", "PCRAM"}) {
    CAPTURE(v);
    REQUIRE(fs::exists(dir / "out" / v / "report.json"));
    CHECK(read_json(dir / "out" / v / "report.json")["config"]["system"]["l2"]["tech"] == v);
  }
  std::istringstream csv(slurp(dir / "out" / "summary.csv"));
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(csv, line)) rows.push_back(line);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].rfind("value,seed,", 0) == 0);
  CHECK(rows[1].rfind("SRAM,", 0) == 0);
  CHECK(rows[3].rfind("PCRAM,", 0) == 0);

  CHECK(tool({"sweep", "--config", cfg.string(), "--param", "l2.tech", "--values", "", "--out",
              (dir / "o2").string()})
            .code == cli::kExitConfig);
  CHECK(tool({"sweep", "--config", cfg.string(), "--param", "l9.tech", "--values", "SRAM", "--out",
              (dir / "o3").string()})
            .code == cli::kExitConfig);
}

TEST_CASE("sequential and parallel sweeps agree") {
  const fs::path dir = scratch("threads");
  const fs::path cfg = write_json(dir / "c.json", small_config());
  const std::vector<std::string> values{"4096", "16384", "65536", "262144"};
  auto sweep = [&](const char* threads, const std::string& out) {
    setenv("TIERSIM_THREADS", threads, 1);
    const auto r = tool({"sweep", "--config", cfg.string(), "--param", "l2.capacity", "--values",
                         "4096,16384,65536,262144", "--out", (dir / out).string()});
    unsetenv("TIERSIM_THREADS");
    return r.code;
  };
  REQUIRE(sweep("1", "seq") == 0);
  REQUIRE(sweep("4", "par") == 0);
  for (const auto& v : values) {
    CAPTURE(v);
    CHECK(strip_timestamp(read_json(dir / "seq" / v / "report.json")) ==
          strip_timestamp(read_json(dir / "par" / v / "report.json")));
  }
  CHECK(slurp(dir / "seq" / "summary.csv") == slurp(dir / "par" / "summary.csv"));

  setenv("TIERSIM_THREADS", "2", 1);
  CHECK(cli::sweep_threads(10) == 2u);
  CHECK(cli::sweep_threads(1) == 1u);
  unsetenv("TIERSIM_THREADS");
}

TEST_CASE("validate") {
  const fs::path dir = scratch("validate");
  CHECK(tool({"validate", "--config", write_json(dir / "ok.json", small_config()).string()}).code == 0);
  json cfg = small_config();
  cfg["system"]["mystery"] = 1;
  cfg["system"]["l1d"]["block_size"] = 48;
  const auto r = tool({"validate", "--config", write_json(dir / "bad.json", cfg).string()});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("mystery") != std::string::npos);
  CHECK(r.err.find("block_size") != std::string::npos);
}

TEST_CASE("gen-trace output is deterministic and parseable") {
  const fs::path dir = scratch("gen");
  auto gen = [&](const std::string& name) {
    return tool({"gen-trace", "--cores", "4", "--length", "50", "--seed", "11", "--out", (dir / name).string()});
  };
  REQUIRE(gen("a.csv").code == 0);
  REQUIRE(gen("b.csv").code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(workload::read_trace_file(dir / "a.csv").size() == 200);

  const auto m = tool({"gen-trace", "--kind", "messages", "--clusters", "4", "--cycles", "100", "--rate", "0.1",
                       "--seed", "2"});
  REQUIRE(m.code == 0);
  std::istringstream in(m.out);
  CHECK_FALSE(workload::read_messages(in).empty());

  CHECK(tool({"gen-trace", "--hot-fraction", "1.5"}).code == cli::kExitConfig);
}
