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


#include "tiersim/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "tiersim/interconnect.hpp"
#include "tiersim/workload.hpp"

namespace tiersim::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using arch::Violation;

LoadedConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  LoadedConfig out;
  try {
    out.json = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!out.json.is_object()) throw ConfigError("config " + path.string() + " must hold a JSON object");
  out.base_dir = path.parent_path();
  return out;
}

json parse_value(std::string_view text) {
  json v = json::parse(text.begin(), text.end(), nullptr, false);
  if (v.is_discarded()) return json(std::string(text));
  return v;
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

json* child(json& node, const std::string& key) {
  if (node.is_object()) {
    auto it = node.find(key);
    return it == node.end() ? nullptr : &*it;
  }
  if (node.is_array() && !key.empty() && std::all_of(key.begin(), key.end(), ::isdigit)) {
    const std::size_t i = std::stoul(key);
    return i < node.size() ? &node[i] : nullptr;
  }
  return nullptr;
}

}  // namespace

void set_path(json& cfg, std::string_view dotted, json value) {
  const auto parts = split(dotted, '.');
  if (dotted.empty() || std::any_of(parts.begin(), parts.end(), [](const auto& p) { return p.empty(); }))
    throw ConfigError("malformed parameter path '" + std::string(dotted) + "'");
  json* node = &cfg;
  if (!child(cfg, parts.front()) && cfg.contains("system") && child(cfg["system"], parts.front()))
    node = &cfg["system"];
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    node = child(*node, parts[i]);
    if (!node) throw ConfigError("parameter path '" + std::string(dotted) + "' does not resolve in the config");
  }
  const std::string& last = parts.back();
  if (node->is_object()) {
    (*node)[last] = std::move(value);
  } else if (json* leaf = child(*node, last)) {
    *leaf = std::move(value);
  } else {
    throw ConfigError("parameter path '" + std::string(dotted) + "' does not resolve in the config");
  }
}

void apply_override(json& cfg, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' needs key=value");
  set_path(cfg, assignment.substr(0, eq), parse_value(assignment.substr(eq + 1)));
}

namespace {

class Checker {
 public:
  Checker(const json& obj, std::string path, std::vector<Violation>& out)
      : obj_(obj), path_(std::move(path)), out_(out) {
    if (!obj_.is_object()) out_.push_back({path_, "must be an object"});
  }

  template <typename T>
  bool take(const char* key, T& value) {
    used_.push_back(key);
    if (!obj_.is_object()) return false;
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return false;
    if constexpr (std::is_unsigned_v<T>) {
      if (!it->is_number_unsigned()) {
        out_.push_back({path_ + "." + key, "must be a non-negative integer"});
        return false;
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) {
        out_.push_back({path_ + "." + key, "must be a number"});
        return false;
      }
    }
    try {
      value = it->get<T>();
      return true;
    } catch (const json::exception&) {
      out_.push_back({path_ + "." + key, "has the wrong type"});
      return false;
    }
  }

  const json* object(const char* key) {
    used_.push_back(key);
    if (!obj_.is_object()) return nullptr;
    auto it = obj_.find(key);
    return it == obj_.end() || it->is_null() ? nullptr : &*it;
  }

  void finish() {
    if (!obj_.is_object()) return;
    for (const auto& [k, v] : obj_.items())
      if (std::find(used_.begin(), used_.end(), k) == used_.end()) out_.push_back({path_ + "." + k, "unknown key"});
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<Violation>& out_;
  std::vector<std::string> used_;
};

struct WorkloadConfig {
  std::vector<fs::path> traces;
  std::optional<fs::path> messages;
  std::optional<workload::SyntheticTraceParams> synthetic;
  std::optional<workload::MessageTrafficParams> traffic;
};

struct RootConfig {
  std::uint64_t seed = 1;
  std::optional<Picoseconds> t_end;
  Picoseconds latency_bucket = 1000;
  std::optional<arch::SystemSpec> spec;
  WorkloadConfig workload;
};

RootConfig read_root(const json& cfg, const fs::path& base, std::vector<Violation>& out) {
  RootConfig r;
  Checker root(cfg, "config", out);
  root.take("seed", r.seed);
  Picoseconds t_end = 0;
  if (root.take("t_end_ps", t_end)) r.t_end = t_end;
  root.take("latency_bucket_ps", r.latency_bucket);
  if (r.latency_bucket == 0) out.push_back({"config.latency_bucket_ps", "must be > 0"});
  std::string output;
  root.take("output", output);

  if (const json* sys = root.object("system")) {
    try {
      std::vector<Violation> unknown;
      r.spec = arch::parse_system(*sys, &unknown);
      out.insert(out.end(), unknown.begin(), unknown.end());
      auto v = arch::validate_spec(*r.spec);
      out.insert(out.end(), v.begin(), v.end());
    } catch (const ConfigError& e) {
      out.push_back({"system", e.what()});
      r.spec.reset();
    }
  } else {
    out.push_back({"config.system", "required"});
  }

  if (const json* wl = root.object("workload")) {
    Checker w(*wl, "workload", out);
    std::vector<std::string> traces;
    if (w.take("traces", traces))
      for (const auto& t : traces) {
        fs::path p = base / t;
        if (!fs::exists(p)) out.push_back({"workload.traces", "trace file " + p.string() + " does not exist"});
        r.workload.traces.push_back(p);
      }
    std::string messages;
    if (w.take("messages", messages)) {
      fs::path p = base / messages;
      if (!fs::exists(p)) out.push_back({"workload.messages", "message file " + p.string() + " does not exist"});
      r.workload.messages = p;
    }
    if (const json* s = w.object("synthetic")) {
      workload::SyntheticTraceParams p;
      p.cores = r.spec ? r.spec->cores() : 1;
      Checker c(*s, "workload.synthetic", out);
      c.take("cores", p.cores);
      c.take("length", p.length);
      c.take("hot_fraction", p.hot_fraction);
      c.take("hot_set_bytes", p.hot_set_bytes);
      c.take("read_write_ratio", p.read_write_ratio);
      c.take("overlap", p.overlap);
      c.take("access_size", p.access_size);
      c.take("tick_stride", p.tick_stride);
      c.take("address_space_bytes", p.address_space_bytes);
      c.finish();
      for (const auto& m : p.violations()) out.push_back({"workload.synthetic", m});
      r.workload.synthetic = p;
    }
    if (const json* s = w.object("message_traffic")) {
      workload::MessageTrafficParams p;
      p.clusters = r.spec ? r.spec->clusters() : 2;
      Checker c(*s, "workload.message_traffic", out);
      c.take("cycles", p.cycles);
      c.take("rate", p.rate);
      c.take("payload_bytes", p.payload_bytes);
      c.finish();
      for (const auto& m : p.violations()) out.push_back({"workload.message_traffic", m});
      r.workload.traffic = p;
    }
    w.finish();
    if (!r.workload.traces.empty() && r.workload.synthetic)
      out.push_back({"workload", "give either traces or synthetic, not both"});
    if (r.workload.messages && r.workload.traffic)
      out.push_back({"workload", "give either messages or message_traffic, not both"});
    if (r.spec && r.spec->clusters() < 2 && (r.workload.messages || r.workload.traffic))
      out.push_back({"workload", "message traffic needs at least two clusters"});
  }
  root.finish();
  return r;
}

std::string join(const std::vector<Violation>& v) {
  std::string s;
  for (const auto& x : v) {
    if (!s.empty()) s += '\n';
    s += x.to_string();
  }
  return s;
}

}  // namespace

std::vector<Violation> check_config(const json& cfg, const fs::path& base_dir) {
  std::vector<Violation> out;
  read_root(cfg, base_dir, out);
  return out;
}

Prepared prepare(const json& cfg, const fs::path& base_dir) {
  std::vector<Violation> v;
  RootConfig r = read_root(cfg, base_dir, v);
  if (!v.empty()) throw ConfigError(join(v));
  Prepared p;
  p.spec = *r.spec;
  p.seed = r.seed;
  p.options.t_end = r.t_end;
  p.options.latency_bucket = r.latency_bucket;
  for (const auto& t : r.workload.traces) {
    auto recs = workload::read_trace_file(t);
    p.workload.trace.insert(p.workload.trace.end(), recs.begin(), recs.end());
  }
  if (r.workload.synthetic) {
    r.workload.synthetic->seed = mix_seed(r.seed, 1);
    p.workload.trace = workload::gen_synthetic_trace(*r.workload.synthetic);
  }
  if (r.workload.messages) p.workload.messages = workload::read_messages_file(*r.workload.messages);
  if (r.workload.traffic) {
    r.workload.traffic->seed = mix_seed(r.seed, 2);
    p.workload.messages = workload::gen_message_traffic(*r.workload.traffic);
  }
  return p;
}

metrics::Report simulate(const json& cfg, const fs::path& base_dir) {
  Prepared p = prepare(cfg, base_dir);
  auto sys = arch::build_system(p.spec, p.seed);
  sys->load(p.workload);
  sys->run(p.options);
  return sys->report(nlohmann::ordered_json::parse(cfg.dump()));
}

unsigned sweep_threads(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TIERSIM_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string csv_number(const std::optional<metrics::LatencySummary>& s) {
  if (!s) return "";
  std::ostringstream o;
  o.precision(17);
  o << s->mean;
  return o.str();
}

std::string dir_name(const std::string& value) {
  std::string s = value;
  for (char& ch : s)
    if (ch == '/' || ch == '\\' || ch == ' ') ch = '_';
  return s.empty() ? "_" : s;
}

int cmd_validate(const fs::path& config, std::ostream& out, std::ostream& err) {
  LoadedConfig lc = load_config(config);
  auto v = check_config(lc.json, lc.base_dir);
  if (!v.empty()) {
    err << join(v) << '\n';
    return kExitConfig;
  }
  out << "ok\n";
  return kExitOk;
}

int cmd_run(const fs::path& config, std::optional<std::uint64_t> seed, const std::vector<std::string>& sets,
            std::optional<Picoseconds> t_end, std::optional<fs::path> out_path, std::optional<fs::path> dump,
            std::ostream& out) {
  LoadedConfig lc = load_config(config);
  for (const auto& s : sets) apply_override(lc.json, s);
  if (seed) lc.json["seed"] = *seed;
  if (t_end) lc.json["t_end_ps"] = *t_end;
  fs::path target = out_path.value_or(lc.json.value("output", std::string("report.json")));
  const metrics::Report rep = simulate(lc.json, lc.base_dir);
  metrics::emit_report(rep, target);
  if (dump) metrics::dump_latencies(rep, *dump);
  out << "report written to " << target.string() << '\n';
  return kExitOk;
}

int cmd_sweep(const fs::path& config, const std::string& param, const std::string& values_text,
              std::optional<std::uint64_t> seed, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  LoadedConfig lc = load_config(config);
  std::vector<std::string> values;
  if (!values_text.empty()) values = split(values_text, ',');
  if (values.empty() || std::any_of(values.begin(), values.end(), [](const auto& v) { return v.empty(); }))
    throw ConfigError("sweep needs a non-empty comma-separated value list");
  const std::uint64_t base_seed = seed.value_or(lc.json.value("seed", std::uint64_t{1}));

  std::vector<json> configs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    json c = lc.json;
    set_path(c, param, parse_value(values[i]));
    c["seed"] = mix_seed(base_seed, i);
    if (auto v = check_config(c, lc.base_dir); !v.empty()) throw ConfigError(values[i] + ": " + join(v));
    configs.push_back(std::move(c));
  }

  std::vector<std::optional<metrics::Report>> reports(values.size());
  std::vector<std::string> errors(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      try {
        reports[i] = simulate(configs[i], lc.base_dir);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = sweep_threads(values.size());
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kExitOk;
  fs::create_directories(out_dir);
  std::ofstream csv(out_dir / "summary.csv");
  if (!csv) throw std::runtime_error("cannot write " + (out_dir / "summary.csv").string());
  csv << "value,seed,duration_ps,total_energy_nj,read_mean_ps,write_mean_ps,message_mean_ps,"
         "bus_transactions,transactions_per_l1_miss,worn_blocks\n";
  csv.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!reports[i]) {
      err << "sweep value " << values[i] << " failed: " << errors[i] << '\n';
      code = kExitFault;
      continue;
    }
    const metrics::Report& r = *reports[i];
    const fs::path dir = out_dir / dir_name(values[i]);
    fs::create_directories(dir);
    metrics::emit_report(r, dir / "report.json");
    csv << values[i] << ',' << r.seed << ',' << r.duration_ps << ',' << r.total_energy_nj << ','
        << csv_number(r.latency.at("read")) << ',' << csv_number(r.latency.at("write")) << ','
        << csv_number(r.latency.at("message")) << ',' << r.bus.transactions << ',';
    if (r.bus.transactions_per_l1_miss) csv << *r.bus.transactions_per_l1_miss;
    csv << ',' << r.endurance.worn_blocks << '\n';
  }
  out << values.size() << " runs written to " << out_dir.string() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"tiersim: 3D MPSoC memory hierarchy simulator"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::optional<Picoseconds> t_end;
  std::optional<std::string> out_path;
  std::optional<std::string> dump;
  auto* run = app.add_subcommand("run", "run one simulation");
  run->add_option("--config", config, "run configuration JSON")->required();
  run->add_option("--seed", seed, "override the configured seed");
  run->add_option("--out", out_path, "report path");
  run->add_option("--set", sets, "override a dotted config path, key=value");
  run->add_option("--t-end", t_end, "stop time in ps");
  run->add_option("--dump-latencies", dump, "write per-sample latencies as CSV");

  std::string param;
  std::string values;
  std::string out_dir;
  auto* sweep = app.add_subcommand("sweep", "run one simulation per parameter value");
  sweep->add_option("--config", config, "base run configuration")->required();
  sweep->add_option("--param", param, "dotted config path")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--seed", seed, "base seed");
  sweep->add_option("--out", out_dir, "output directory")->required();

  auto* validate = app.add_subcommand("validate", "check a configuration");
  validate->add_option("--config", config, "run configuration JSON")->required();

  std::string kind = "trace";
  workload::SyntheticTraceParams tp;
  workload::MessageTrafficParams mp;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen-trace", "write a synthetic trace or message list");
  gen->add_option("--kind", kind, "trace or messages")->check(CLI::IsMember({"trace", "messages"}));
  gen->add_option("--cores", tp.cores);
  gen->add_option("--length", tp.length, "accesses per core");
  gen->add_option("--hot-fraction", tp.hot_fraction);
  gen->add_option("--hot-set-bytes", tp.hot_set_bytes);
  gen->add_option("--rw-ratio", tp.read_write_ratio, "reads per write");
  gen->add_option("--overlap", tp.overlap);
  gen->add_option("--access-size", tp.access_size);
  gen->add_option("--tick-stride", tp.tick_stride);
  gen->add_option("--address-space", tp.address_space_bytes);
  gen->add_option("--clusters", mp.clusters);
  gen->add_option("--cycles", mp.cycles);
  gen->add_option("--rate", mp.rate);
  gen->add_option("--payload", mp.payload_bytes);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", out_path, "output file, stdout when absent");

  std::string dims;
  auto* hops = app.add_subcommand("hops", "print the mean hop count of a mesh");
  hops->add_option("--dims", dims, "XxYxZ")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, seed, sets, t_end, out_path, dump, out);
    if (*sweep) return cmd_sweep(config, param, values, seed, out_dir, out, err);
    if (*validate) return cmd_validate(config, out, err);
    if (*hops) {
      out << fixed4(interconnect::mean_hop_count(interconnect::parse_dims(dims)).value()) << '\n';
      return kExitOk;
    }
    if (*gen) {
      std::ofstream file;
      if (out_path) {
        file.open(*out_path);
        if (!file) throw ConfigError("cannot write " + *out_path);
      }
      std::ostream& dst = out_path ? static_cast<std::ostream&>(file) : out;
      if (kind == "trace") {
        tp.seed = gen_seed;
        if (auto v = tp.violations(); !v.empty()) throw ConfigError(v.front());
        workload::write_trace(dst, workload::gen_synthetic_trace(tp));
      } else {
        mp.seed = gen_seed;
        if (auto v = mp.violations(); !v.empty()) throw ConfigError(v.front());
        workload::write_messages(dst, workload::gen_message_traffic(mp));
      }
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "fault: " << e.what() << '\n';
    return kExitFault;
  }
  return kExitConfig;
}

}  // namespace tiersim::cli
