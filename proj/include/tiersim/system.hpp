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
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"
#include "tiersim/cache.hpp"
#include "tiersim/engine.hpp"
#include "tiersim/interconnect.hpp"
#include "tiersim/metrics.hpp"
#include "tiersim/spec.hpp"
#include "tiersim/workload.hpp"

namespace tiersim::arch {

struct Workload {
  std::vector<workload::TraceRecord> trace;
  std::vector<workload::MessageRecord> messages;
};

/// One core access bound to its value. Reads carry the value of the word at
/// `addr`; writes carry the value stored into every word they touch.
struct CommitRecord {
  std::uint64_t order = 0;
  Picoseconds time = 0;
  std::uint32_t core = 0;
  std::uint32_t cluster = 0;
  workload::Op op = workload::Op::kRead;
  Address addr = 0;
  std::uint64_t value = 0;
};

/// Per-agent MOESI states of a block right after a bus transaction.
struct BusObservation {
  std::uint32_t cluster = 0;
  Address block = 0;
  std::vector<cache::LineState> states;
};

struct RunOptions {
  std::optional<Picoseconds> t_end;
  Picoseconds latency_bucket = 1000;
};

class Cluster;

/// A built, simulatable system: per cluster, trace-driven cores with private
/// L1 (and optional private L2), a three-channel coherent bus, shared cache
/// levels and one memory controller; clusters exchange only messages over
/// the mesh.
class System {
 public:
  System(const SystemSpec& spec, std::uint64_t seed);
  ~System();
  System(const System&) = delete;
  System& operator=(const System&) = delete;

  /// Throws ConfigError for cores or clusters the system does not have.
  void load(const Workload& workload);
  void run(const RunOptions& options = {});
  metrics::Report report(nlohmann::ordered_json config_echo) const;

  const SystemSpec& spec() const { return spec_; }
  std::uint32_t cluster_count() const { return spec_.clusters(); }
  std::uint32_t core_count() const { return spec_.cores(); }
  std::uint32_t bus_count() const { return spec_.clusters(); }
  std::uint32_t memory_controller_count() const;
  bool has_noc() const { return static_cast<bool>(noc_); }

  /// True when no data path joins the memory of two different clusters.
  bool clusters_isolated() const;

  /// Per-agent coherence states of the block holding `addr` in `cluster`.
  std::vector<cache::LineState> block_states(std::uint32_t cluster, Address addr) const;

  engine::Kernel& kernel() { return kernel_; }

  std::function<void(const CommitRecord&)> on_commit;
  std::function<void(const BusObservation&)> on_bus_transaction;

 private:
  friend class Cluster;

  struct DataEdge {
    std::size_t from;
    std::size_t to;
    bool message;
  };

  SystemSpec spec_;
  std::uint64_t seed_;
  engine::Kernel kernel_;
  std::vector<std::unique_ptr<Cluster>> clusters_;
  std::unique_ptr<interconnect::MeshNetwork> noc_;
  std::vector<std::vector<std::size_t>> memory_nodes_;
  std::vector<DataEdge> edges_;
  std::size_t graph_nodes_ = 0;
  std::uint64_t commit_seq_ = 0;
  std::uint64_t write_seq_ = 0;
  std::vector<metrics::LatencySample> samples_;
  RunOptions options_;
  Picoseconds duration_ = 0;
};

/// Validates the spec and builds the system; throws ConfigError naming the
/// first violation.
std::unique_ptr<System> build_system(const SystemSpec& spec, std::uint64_t seed);

}  // namespace tiersim::arch
