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


#include "tiersim/system.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>
#include <unordered_map>

#include "tiersim/coherence.hpp"

namespace tiersim::arch {

using cache::CacheArray;
using cache::CoreOp;
using cache::LineState;
using interconnect::BusChannel;
using workload::Op;
using workload::TraceRecord;

namespace {

using Words = std::vector<std::uint64_t>;

constexpr std::uint64_t kCommandBytes = 8;

std::unique_ptr<CacheArray> make_array(const SystemSpec& spec, const LevelConfig& cfg, Rng rng) {
  std::vector<memtech::TechnologyParams> tech;
  if (cfg.geometry.regions.empty()) {
    tech.push_back(memtech::lookup(spec.technologies, cfg.technology));
  } else {
    for (const auto& r : cfg.geometry.regions) tech.push_back(memtech::lookup(spec.technologies, r.technology));
  }
  return std::make_unique<CacheArray>(cfg.geometry, std::move(tech), spec.clocks.core, spec.write_mix, rng);
}

std::uint64_t full_mask(const CacheArray& c) {
  const std::uint32_t n = c.geometry().words_per_block();
  return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

}  // namespace

class Cluster : public engine::Component {
 public:
  enum Kind : std::uint32_t { kIssue = 1, kPrivateL2 = 2, kEnqueue = 3, kArbitrate = 4, kComplete = 5 };

  struct Agent {
    std::unique_ptr<CacheArray> l1i;
    std::unique_ptr<CacheArray> l1d;
    std::unique_ptr<CacheArray> l2;
    std::unique_ptr<CacheArray> l2i;
  };

  struct Core {
    std::vector<TraceRecord> trace;
    std::size_t next = 0;
    TraceRecord current;
    Picoseconds issued = 0;
    Picoseconds source_latency = 0;
    std::uint64_t response_bytes = 0;
  };

  Cluster(System& sys, std::uint32_t index, std::uint64_t seed)
      : sys_(sys), index_(index), bus_(sys.spec_.bus_beat_width, sys.spec_.clocks.bus) {
    const SystemSpec& s = sys.spec_;
    id_ = sys.kernel_.add(*this);
    const bool split = s.l2_split(index);
    std::uint64_t stream = std::uint64_t{index} << 16;
    auto rng = [&] { return Rng(seed, stream++); };
    for (std::uint32_t c = 0; c < s.cores_per_cluster; ++c) {
      Agent a;
      a.l1i = make_array(s, s.l1i, rng());
      a.l1d = make_array(s, s.l1d, rng());
      if (s.l2_sharing == L2Sharing::kPrivate) {
        a.l2 = make_array(s, s.l2, rng());
        if (split) a.l2i = make_array(s, s.l2, rng());
      }
      agents_.push_back(std::move(a));
    }
    cores_.resize(s.cores_per_cluster);
    if (s.l2_sharing == L2Sharing::kShared) {
      shared_l2_ = make_array(s, s.l2, rng());
      if (split) shared_l2i_ = make_array(s, s.l2, rng());
      shared_.push_back(shared_l2_.get());
    }
    if (s.l3) {
      l3_ = make_array(s, *s.l3, rng());
      shared_.push_back(l3_.get());
    }
    memory_latency_ = engine::cycles_for_latency(s.memory_latency_ns, s.clocks.core) * s.clocks.core;
    block_size_ = s.l1d.geometry.block_size;
  }

  void load(std::uint32_t core, const TraceRecord& r) { cores_[core].trace.push_back(r); }

  void start() {
    for (std::uint32_t c = 0; c < cores_.size(); ++c) schedule_issue(c, 0);
  }

  void handle(const engine::Event& e) override {
    const Picoseconds now = sys_.kernel_.now();
    switch (e.kind) {
      case kIssue: issue(static_cast<std::uint32_t>(e.a), now); break;
      case kPrivateL2: private_l2(static_cast<std::uint32_t>(e.a), now); break;
      case kEnqueue:
        enqueue(static_cast<BusChannel>(e.a), static_cast<std::uint32_t>(e.b >> 1), (e.b & 1) != 0, now);
        break;
      case kArbitrate: arbitrate(static_cast<BusChannel>(e.a), now); break;
      case kComplete: complete(static_cast<std::uint32_t>(e.a), now); break;
      default: throw SimulationFault("cluster received unknown event kind");
    }
  }

  std::vector<LineState> states(Address block) const {
    std::vector<LineState> out;
    for (const Agent& a : agents_) out.push_back(agent_state(a, block));
    return out;
  }

  // --- report access ------------------------------------------------------
  const std::vector<Agent>& agents() const { return agents_; }
  const CacheArray* shared_l2() const { return shared_l2_.get(); }
  const CacheArray* shared_l2i() const { return shared_l2i_.get(); }
  const CacheArray* l3() const { return l3_.get(); }
  const interconnect::ClusterBus& bus() const { return bus_; }
  std::uint64_t transactions() const { return transactions_; }
  std::uint64_t bus_writebacks() const { return bus_writebacks_; }
  std::uint64_t invalidations() const { return invalidations_; }
  std::uint64_t cache_to_cache() const { return cache_to_cache_; }
  std::uint64_t l1_misses() const { return l1_misses_; }

 private:
  // --- core pipeline ------------------------------------------------------

  void schedule_issue(std::uint32_t c, Picoseconds after) {
    Core& core = cores_[c];
    if (core.next >= core.trace.size()) return;
    const Picoseconds t = std::max(after, core.trace[core.next].tick * sys_.spec_.clocks.core);
    sys_.kernel_.schedule(t, id_, kIssue, c);
  }

  void issue(std::uint32_t c, Picoseconds now) {
    Core& core = cores_[c];
    core.current = core.trace[core.next++];
    core.issued = now;
    const TraceRecord& r = core.current;
    CacheArray& l1 = *agents_[c].l1d;
    const Address block = l1.block_address(r.addr);
    const auto set = l1.split(block).set;
    const CoreOp op = r.op == Op::kWrite ? CoreOp::kWrite : CoreOp::kRead;
    const auto way = l1.find(block);
    if (way && permits(l1.line(set, *way).state, r.op)) {
      const Picoseconds lat = l1.hit_latency(set, *way, op);
      l1.count_access(set, way, op, true, now, lat);
      if (r.op == Op::kWrite && l1.line(set, *way).state == LineState::kE) set_agent_state(c, block, LineState::kM);
      commit(c, now, nullptr);
      sys_.kernel_.schedule(now + lat, id_, kComplete, c);
      return;
    }
    const Picoseconds lat = l1.miss_latency(set);
    l1.count_access(set, way, op, false, now, lat);
    ++l1_misses_;
    if (agents_[c].l2)
      sys_.kernel_.schedule(now + lat, id_, kPrivateL2, c);
    else
      sys_.kernel_.schedule(now + lat, id_, kEnqueue, static_cast<std::uint64_t>(BusChannel::kRequest), c << 1);
  }

  void private_l2(std::uint32_t c, Picoseconds now) {
    const TraceRecord& r = cores_[c].current;
    CacheArray& l2 = *agents_[c].l2;
    const Address block = l2.block_address(r.addr);
    const auto set = l2.split(block).set;
    const CoreOp op = r.op == Op::kWrite ? CoreOp::kWrite : CoreOp::kRead;
    const auto way = l2.find(block);
    if (way && permits(l2.line(set, *way).state, r.op)) {
      const Picoseconds lat = l2.hit_latency(set, *way, CoreOp::kRead);
      l2.count_access(set, way, op, true, now, lat);
      l2.touch(set, *way);
      const cache::CacheLine& line = l2.line(set, *way);
      const LineState next = r.op == Op::kWrite ? LineState::kM : line.state;
      const std::uint64_t mask = is_dirty(line.state) ? line.dirty_word_mask : 0;
      const Words data = line.words;
      const bool cached = fill_l1(c, block, next, data, mask, now);
      set_agent_state(c, block, next);
      commit(c, now, cached ? nullptr : &data);
      sys_.kernel_.schedule(now + lat, id_, kComplete, c);
      return;
    }
    const Picoseconds lat = l2.miss_latency(set);
    l2.count_access(set, way, op, false, now, lat);
    sys_.kernel_.schedule(now + lat, id_, kEnqueue, static_cast<std::uint64_t>(BusChannel::kRequest), c << 1);
  }

  void complete(std::uint32_t c, Picoseconds now) {
    Core& core = cores_[c];
    sys_.samples_.push_back({core.current.op == Op::kWrite ? "write" : "read", core.issued, now});
    schedule_issue(c, now);
  }

  static bool permits(LineState s, Op op) {
    if (s == LineState::kI) return false;
    return op == Op::kRead || s == LineState::kM || s == LineState::kE;
  }

  // --- bus ------------------------------------------------------------------

  void enqueue(BusChannel ch, std::uint32_t c, bool writeback, Picoseconds now) {
    const engine::Clock& clk = bus_.clock;
    std::uint64_t bytes = kCommandBytes;
    if (writeback)
      bytes = block_size_;
    else if (ch == BusChannel::kResponse)
      bytes = cores_[c].response_bytes;
    const Cycles cycle = clk.cycle_at_or_after(now);
    bus_.channel(ch).enqueue({c, bytes, writeback ? 1u : 0u, cycle});
    auto& pending = arbitration_pending_[static_cast<std::size_t>(ch)];
    if (!pending) {
      pending = true;
      const Cycles at = std::max(cycle, bus_.channel(ch).free_at());
      sys_.kernel_.schedule(clk.to_time(at), id_, kArbitrate, static_cast<std::uint64_t>(ch));
    }
  }

  void arbitrate(BusChannel ch, Picoseconds now) {
    interconnect::Channel& channel = bus_.channel(ch);
    const engine::Clock& clk = bus_.clock;
    const Cycles cycle = clk.cycle_at_or_after(now);
    if (auto req = channel.arbitrate(cycle)) granted(ch, *req, cycle);
    auto& pending = arbitration_pending_[static_cast<std::size_t>(ch)];
    if (channel.empty()) {
      pending = false;
      return;
    }
    Cycles at = std::max(channel.free_at(), cycle + 1);
    sys_.kernel_.schedule(clk.to_time(at), id_, kArbitrate, static_cast<std::uint64_t>(ch));
  }

  void granted(BusChannel ch, const interconnect::BusRequest& req, Cycles cycle) {
    const engine::Clock& clk = bus_.clock;
    const Cycles done = cycle + bus_.channel(ch).occupancy(req.bytes);
    const std::uint32_t c = req.requester;
    switch (ch) {
      case BusChannel::kRequest:
        ++transactions_;
        if (req.tag != 0) return;
        transact(c, clk.to_time(cycle));
        sys_.kernel_.schedule(clk.to_time(done), id_, kEnqueue, static_cast<std::uint64_t>(BusChannel::kSnoop), c << 1);
        break;
      case BusChannel::kSnoop:
        sys_.kernel_.schedule(clk.to_time(done) + cores_[c].source_latency, id_, kEnqueue,
                              static_cast<std::uint64_t>(BusChannel::kResponse), c << 1);
        break;
      case BusChannel::kResponse:
        sys_.kernel_.schedule(clk.to_time(done), id_, kComplete, c);
        break;
    }
  }

  /// The request grant is the serialization point: the whole coherence
  /// transaction for the block is applied here.
  void transact(std::uint32_t c, Picoseconds now) {
    Core& core = cores_[c];
    const TraceRecord& r = core.current;
    const CacheArray& l1 = *agents_[c].l1d;
    const Address block = l1.block_address(r.addr);
    const std::vector<LineState> before = states(block);
    const coherence::StepResult res = coherence::step(
        before, {r.op == Op::kWrite ? coherence::EventKind::kCoreWrite : coherence::EventKind::kCoreRead, c});

    Words data;
    std::uint64_t mask = 0;
    Picoseconds latency = 0;
    bool moves_data = true;
    if (res.supplier) {
      const auto [words, m, lat] = authoritative(*res.supplier, block);
      data = words;
      mask = m;
      latency = lat;
      ++cache_to_cache_;
    } else if (res.memory_supplies) {
      std::tie(data, latency) = fetch_shared(0, block, now);
    } else {
      const auto [words, m, lat] = authoritative(c, block);
      data = words;
      mask = m;
      moves_data = false;
    }
    for (const auto& a : res.actions)
      if (a.action == coherence::BusAction::kInvalidate) ++invalidations_;
    for (std::uint32_t i = 0; i < agents_.size(); ++i)
      if (i != c && res.next[i] != before[i]) set_agent_state(i, block, res.next[i]);

    const LineState mine = res.next[c];
    if (!is_dirty(mine)) mask = 0;
    const bool cached = fill_l1(c, block, mine, data, mask, now);
    if (moves_data && agents_[c].l2) fill_private_l2(c, block, mine, data, mask, now);
    set_agent_state(c, block, mine);
    commit(c, now, cached ? nullptr : &data);

    core.source_latency = latency;
    core.response_bytes = moves_data ? block_size_ : kCommandBytes;

    const std::vector<LineState> after = states(block);
    if (auto bad = coherence::check_invariants(after))
      throw SimulationFault("coherence invariant violated for block " + std::to_string(block) + ": " + *bad);
    if (sys_.on_bus_transaction) sys_.on_bus_transaction({index_, block, after});
  }

  // --- data movement --------------------------------------------------------

  static LineState line_state(const CacheArray& c, Address block) {
    if (auto w = c.find(block)) {
      const auto& l = c.line(c.split(block).set, *w);
      if (l.valid()) return l.state;
    }
    return LineState::kI;
  }

  static LineState agent_state(const Agent& a, Address block) {
    const LineState s = line_state(*a.l1d, block);
    if (s != LineState::kI || !a.l2) return s;
    return line_state(*a.l2, block);
  }

  void set_agent_state(std::uint32_t c, Address block, LineState s) {
    for (CacheArray* arr : {agents_[c].l1d.get(), agents_[c].l2.get()}) {
      if (!arr) continue;
      auto w = arr->find(block);
      if (!w) continue;
      auto& l = arr->line(arr->split(block).set, *w);
      if (!l.valid()) continue;
      l.state = s;
      if (!is_dirty(s)) l.dirty_word_mask = 0;
    }
  }

  struct Copy {
    Words words;
    std::uint64_t mask;
    Picoseconds latency;
  };

  /// Data of the agent's newest copy: the L1 line if present, else the
  /// private L2 line.
  Copy authoritative(std::uint32_t c, Address block) const {
    for (const CacheArray* arr : {agents_[c].l1d.get(), agents_[c].l2.get()}) {
      if (!arr) continue;
      const auto set = arr->split(block).set;
      if (auto w = arr->find(block); w && arr->line(set, *w).valid()) {
        const auto& l = arr->line(set, *w);
        return {l.words, l.dirty_word_mask, arr->hit_latency(set, *w, CoreOp::kRead)};
      }
    }
    throw SimulationFault("agent " + std::to_string(c) + " holds no copy of block " + std::to_string(block));
  }

  /// Returns false when every way of the L1 set is worn.
  bool fill_l1(std::uint32_t c, Address block, LineState state, const Words& data, std::uint64_t mask,
               Picoseconds now) {
    CacheArray& l1 = *agents_[c].l1d;
    const auto set = l1.split(block).set;
    if (auto w = l1.find(block)) {
      auto& l = l1.line(set, *w);
      if (l.valid()) {
        l.state = state;
        l1.touch(set, *w);
        return true;
      }
    }
    const auto victim = l1.victim(set);
    if (!victim) return false;
    evict_l1(c, set, *victim, now);
    l1.install(block, *victim, state, data);
    l1.line(set, *victim).dirty_word_mask = mask;
    l1.touch(set, *victim);
    return true;
  }

  void evict_l1(std::uint32_t c, std::uint64_t set, std::uint32_t way, Picoseconds now) {
    CacheArray& l1 = *agents_[c].l1d;
    auto& l = l1.line(set, way);
    if (!l.valid()) return;
    ++l1.stats().evictions;
    const Address block = l1.block_of(set, way);
    const LineState s = l.state;
    l.state = LineState::kI;
    if (!is_dirty(s)) {
      l.dirty_word_mask = 0;
      return;
    }
    ++l1.stats().writebacks;
    const std::uint64_t mask = l.dirty_word_mask ? l.dirty_word_mask : full_mask(l1);
    l.dirty_word_mask = 0;
    push_down(c, block, l.words, mask, s, now);
  }

  /// Dirty data leaving an agent's L1: into its private L2, else over the
  /// bus into the shared levels.
  void push_down(std::uint32_t c, Address block, const Words& words, std::uint64_t mask, LineState s,
                 Picoseconds now) {
    if (agents_[c].l2)
      writeback_private(c, block, words, mask, s, now);
    else
      writeback_bus(block, words, mask, c, now);
  }

  void fill_private_l2(std::uint32_t c, Address block, LineState state, const Words& data, std::uint64_t mask,
                       Picoseconds now) {
    CacheArray& l2 = *agents_[c].l2;
    const auto set = l2.split(block).set;
    if (auto w = l2.find(block); w && l2.line(set, *w).valid()) {
      auto& l = l2.line(set, *w);
      l.state = state;
      l.words = data;
      l.dirty_word_mask = mask;
      return;
    }
    const auto victim = l2.victim(set);
    if (!victim) return;
    evict_private_l2(c, set, *victim, now);
    l2.install(block, *victim, state, data);
    l2.line(set, *victim).dirty_word_mask = mask;
    l2.touch(set, *victim);
  }

  void evict_private_l2(std::uint32_t c, std::uint64_t set, std::uint32_t way, Picoseconds now) {
    CacheArray& l2 = *agents_[c].l2;
    auto& l = l2.line(set, way);
    if (!l.valid()) return;
    ++l2.stats().evictions;
    const Address block = l2.block_of(set, way);
    const LineState s = l.state;
    l.state = LineState::kI;
    const std::uint64_t mask = l.dirty_word_mask ? l.dirty_word_mask : full_mask(l2);
    l.dirty_word_mask = 0;
    if (!is_dirty(s) || line_state(*agents_[c].l1d, block) != LineState::kI) return;
    ++l2.stats().writebacks;
    writeback_bus(block, l.words, mask, c, now);
  }

  void writeback_private(std::uint32_t c, Address block, const Words& words, std::uint64_t mask, LineState s,
                         Picoseconds now) {
    CacheArray& l2 = *agents_[c].l2;
    const auto set = l2.split(block).set;
    auto way = l2.find(block);
    if (way && !l2.line(set, *way).valid()) way.reset();
    if (way) {
      l2.count_access(set, way, CoreOp::kWrite, true, now, l2.hit_latency(set, *way, CoreOp::kWrite));
      auto& l = l2.line(set, *way);
      l.words = words;
      l.state = s;
    } else {
      const auto victim = l2.victim(set);
      l2.count_access(set, victim, CoreOp::kWrite, false, now, l2.miss_latency(set));
      if (!victim) {
        writeback_bus(block, words, mask, c, now);
        return;
      }
      evict_private_l2(c, set, *victim, now);
      l2.install(block, *victim, s, words);
      way = victim;
    }
    l2.touch(set, *way);
    auto& l = l2.line(set, *way);
    l.dirty_word_mask |= mask;
    if (l2.record_write(set, *way, mask, now)) writeback_bus(block, l.words, l.dirty_word_mask, c, now);
  }

  /// A writeback transaction on the request channel; the data lands in the
  /// shared levels immediately.
  void writeback_bus(Address block, const Words& words, std::uint64_t mask, std::uint32_t c, Picoseconds now) {
    ++bus_writebacks_;
    sys_.kernel_.schedule(now, id_, kEnqueue, static_cast<std::uint64_t>(BusChannel::kRequest), (c << 1) | 1);
    write_shared(0, block, words, mask, now);
  }

  void write_shared(std::size_t level, Address block, const Words& words, std::uint64_t mask, Picoseconds now) {
    if (level == shared_.size()) {
      write_memory(block, words, now);
      return;
    }
    CacheArray& arr = *shared_[level];
    const auto set = arr.split(block).set;
    auto way = arr.find(block);
    if (way && !arr.line(set, *way).valid()) way.reset();
    if (way) {
      arr.count_access(set, way, CoreOp::kWrite, true, now, arr.hit_latency(set, *way, CoreOp::kWrite));
      auto& l = arr.line(set, *way);
      l.words = words;
      l.state = LineState::kM;
    } else {
      const auto victim = arr.victim(set);
      arr.count_access(set, victim, CoreOp::kWrite, false, now, arr.miss_latency(set));
      if (!victim) {
        write_shared(level + 1, block, words, mask, now);
        return;
      }
      evict_shared(level, set, *victim, now);
      arr.install(block, *victim, LineState::kM, words);
      way = victim;
    }
    arr.touch(set, *way);
    auto& l = arr.line(set, *way);
    l.dirty_word_mask |= mask;
    if (arr.record_write(set, *way, mask, now)) write_shared(level + 1, block, l.words, l.dirty_word_mask, now);
  }

  void evict_shared(std::size_t level, std::uint64_t set, std::uint32_t way, Picoseconds now) {
    CacheArray& arr = *shared_[level];
    auto& l = arr.line(set, way);
    if (!l.valid()) return;
    ++arr.stats().evictions;
    const LineState s = l.state;
    l.state = LineState::kI;
    const std::uint64_t mask = l.dirty_word_mask ? l.dirty_word_mask : full_mask(arr);
    l.dirty_word_mask = 0;
    if (!is_dirty(s)) return;
    ++arr.stats().writebacks;
    write_shared(level + 1, arr.block_of(set, way), l.words, mask, now);
  }

  /// Reads a block through the shared levels, filling each level that
  /// misses. Returns the data and the latency from `arrival`.
  std::pair<Words, Picoseconds> fetch_shared(std::size_t level, Address block, Picoseconds arrival) {
    if (level == shared_.size()) return read_memory(block, arrival);
    CacheArray& arr = *shared_[level];
    const auto set = arr.split(block).set;
    if (auto w = arr.find(block); w && arr.line(set, *w).valid()) {
      const Picoseconds lat = arr.hit_latency(set, *w, CoreOp::kRead);
      arr.count_access(set, w, CoreOp::kRead, true, arrival, lat);
      arr.touch(set, *w);
      return {arr.line(set, *w).words, lat};
    }
    const auto victim = arr.victim(set);
    const Picoseconds lat = arr.miss_latency(set);
    arr.count_access(set, victim, CoreOp::kRead, false, arrival, lat);
    auto [words, below] = fetch_shared(level + 1, block, arrival + lat);
    if (victim) {
      evict_shared(level, set, *victim, arrival);
      arr.install(block, *victim, LineState::kE, words);
      arr.touch(set, *victim);
    }
    return {std::move(words), lat + below};
  }

  std::pair<Words, Picoseconds> read_memory(Address block, Picoseconds arrival) {
    const Picoseconds start = std::max(arrival, memory_free_);
    memory_free_ = start + memory_latency_;
    ++memory_reads_;
    Words words(block_size_ / cache::kWordBytes, 0);
    for (std::size_t i = 0; i < words.size(); ++i) {
      auto it = memory_.find(block + i * cache::kWordBytes);
      if (it != memory_.end()) words[i] = it->second;
    }
    return {std::move(words), memory_free_ - arrival};
  }

  void write_memory(Address block, const Words& words, Picoseconds now) {
    memory_free_ = std::max(now, memory_free_) + memory_latency_;
    ++memory_writes_;
    for (std::size_t i = 0; i < words.size(); ++i) memory_[block + i * cache::kWordBytes] = words[i];
  }

  /// Performs the current access of core c. `uncached` carries the block
  /// data when the L1 could not hold it.
  void commit(std::uint32_t c, Picoseconds now, const Words* uncached) {
    const TraceRecord& r = cores_[c].current;
    CacheArray& l1 = *agents_[c].l1d;
    const Address block = l1.block_address(r.addr);
    const auto parts = l1.split(r.addr);
    const std::uint64_t mask = cache::word_mask(parts.offset, r.size, l1.geometry());
    const std::size_t word = parts.offset / cache::kWordBytes;
    CommitRecord rec{++sys_.commit_seq_, now, cluster_core(c), index_, r.op, r.addr, 0};

    if (uncached) {
      Words data = *uncached;
      if (r.op == Op::kRead) {
        rec.value = data[word];
      } else {
        rec.value = ++sys_.write_seq_;
        for (std::size_t i = 0; i < data.size(); ++i)
          if (mask >> i & 1) data[i] = rec.value;
        push_down(c, block, data, mask, LineState::kM, now);
      }
      if (sys_.on_commit) sys_.on_commit(rec);
      return;
    }

    const auto way = *l1.find(block);
    auto& l = l1.line(parts.set, way);
    l1.touch(parts.set, way);
    if (r.op == Op::kRead) {
      rec.value = l.words[word];
    } else {
      rec.value = ++sys_.write_seq_;
      for (std::size_t i = 0; i < l.words.size(); ++i)
        if (mask >> i & 1) l.words[i] = rec.value;
      l.dirty_word_mask |= mask;
      if (l1.record_write(parts.set, way, mask, now)) {
        l.dirty_word_mask = 0;
        push_down(c, block, l.words, full_mask(l1), LineState::kM, now);
      }
    }
    if (sys_.on_commit) sys_.on_commit(rec);
  }

  std::uint32_t cluster_core(std::uint32_t c) const { return index_ * sys_.spec_.cores_per_cluster + c; }

  System& sys_;
  std::uint32_t index_;
  engine::ComponentId id_ = 0;
  interconnect::ClusterBus bus_;
  std::array<bool, 3> arbitration_pending_{};
  std::vector<Agent> agents_;
  std::vector<Core> cores_;
  std::unique_ptr<CacheArray> shared_l2_;
  std::unique_ptr<CacheArray> shared_l2i_;
  std::unique_ptr<CacheArray> l3_;
  std::vector<CacheArray*> shared_;
  std::unordered_map<Address, std::uint64_t> memory_;
  Picoseconds memory_latency_ = 0;
  Picoseconds memory_free_ = 0;
  std::uint64_t block_size_ = 64;
  std::uint64_t memory_reads_ = 0;
  std::uint64_t memory_writes_ = 0;
  std::uint64_t transactions_ = 0;
  std::uint64_t bus_writebacks_ = 0;
  std::uint64_t invalidations_ = 0;
  std::uint64_t cache_to_cache_ = 0;
  std::uint64_t l1_misses_ = 0;
};

// --- System -------------------------------------------------------------------

System::System(const SystemSpec& spec, std::uint64_t seed) : spec_(spec), seed_(seed) {
  for (std::uint32_t c = 0; c < spec_.clusters(); ++c) clusters_.push_back(std::make_unique<Cluster>(*this, c, seed));
  if (spec_.clusters() > 1) {
    noc_ = std::make_unique<interconnect::MeshNetwork>(kernel_, spec_.noc, spec_.clocks.noc);
    noc_->on_deliver = [this](const interconnect::Packet& p) {
      samples_.push_back({"message", p.t_inject, *p.t_deliver});
    };
  }

  // Data-path graph: core -> L1 -> bus -> shared levels -> memory inside a
  // cluster. Network interfaces hang off the bus and meet at the mesh, but
  // those edges only carry messages.
  const bool with_l3 = spec_.l3.has_value();
  std::size_t mesh = graph_nodes_++;
  for (std::uint32_t c = 0; c < spec_.clusters(); ++c) {
    const std::size_t bus = graph_nodes_++;
    for (std::uint32_t k = 0; k < spec_.cores_per_cluster; ++k) {
      const std::size_t core = graph_nodes_++;
      const std::size_t l1 = graph_nodes_++;
      edges_.push_back({core, l1, false});
      if (spec_.l2_sharing == L2Sharing::kPrivate) {
        const std::size_t l2 = graph_nodes_++;
        edges_.push_back({l1, l2, false});
        edges_.push_back({l2, bus, false});
      } else {
        edges_.push_back({l1, bus, false});
      }
    }
    std::size_t upper = bus;
    if (spec_.l2_sharing == L2Sharing::kShared) {
      const std::size_t l2 = graph_nodes_++;
      edges_.push_back({upper, l2, false});
      upper = l2;
    }
    if (with_l3) {
      const std::size_t l3 = graph_nodes_++;
      edges_.push_back({upper, l3, false});
      upper = l3;
    }
    const std::size_t mem = graph_nodes_++;
    edges_.push_back({upper, mem, false});
    memory_nodes_.push_back({mem});
    const std::size_t ni = graph_nodes_++;
    edges_.push_back({bus, ni, true});
    edges_.push_back({ni, mesh, true});
  }
}

System::~System() = default;

std::uint32_t System::memory_controller_count() const { return static_cast<std::uint32_t>(memory_nodes_.size()); }

bool System::clusters_isolated() const {
  std::vector<std::vector<std::size_t>> adj(graph_nodes_);
  for (const auto& e : edges_) {
    if (e.message) continue;
    adj[e.from].push_back(e.to);
    adj[e.to].push_back(e.from);
  }
  std::vector<int> owner(graph_nodes_, -1);
  for (std::size_t c = 0; c < memory_nodes_.size(); ++c) {
    std::deque<std::size_t> q(memory_nodes_[c].begin(), memory_nodes_[c].end());
    for (auto n : q) owner[n] = static_cast<int>(c);
    while (!q.empty()) {
      const std::size_t n = q.front();
      q.pop_front();
      for (auto m : adj[n]) {
        if (owner[m] == static_cast<int>(c)) continue;
        if (owner[m] >= 0) return false;
        owner[m] = static_cast<int>(c);
        q.push_back(m);
      }
    }
  }
  return true;
}

std::vector<LineState> System::block_states(std::uint32_t cluster, Address addr) const {
  const Address block = addr - addr % spec_.l1d.geometry.block_size;
  return clusters_.at(cluster)->states(block);
}

void System::load(const Workload& w) {
  for (const auto& r : w.trace) {
    if (r.core >= spec_.cores())
      throw ConfigError("trace names core " + std::to_string(r.core) + " but the system has " +
                        std::to_string(spec_.cores()) + " cores");
    if (r.addr >= kAddressLimit) throw ConfigError("trace address beyond the 48-bit address space");
    clusters_[r.core / spec_.cores_per_cluster]->load(r.core % spec_.cores_per_cluster, r);
  }
  if (!w.messages.empty() && !noc_) throw ConfigError("message workload needs at least two clusters");
  for (const auto& m : w.messages) {
    if (m.src_cluster >= spec_.clusters() || m.dst_cluster >= spec_.clusters())
      throw ConfigError("message names cluster beyond the " + std::to_string(spec_.clusters()) + " clusters");
    const auto& dims = spec_.noc.dims;
    noc_->inject(m.tick * spec_.clocks.noc, dims.coord(m.src_cluster), dims.coord(m.dst_cluster),
                 interconnect::PacketKind::kMessage, m.bytes);
  }
}

void System::run(const RunOptions& options) {
  options_ = options;
  for (auto& c : clusters_) c->start();
  if (options.t_end) {
    kernel_.run_until(*options.t_end);
    duration_ = *options.t_end;
  } else {
    kernel_.run();
    duration_ = kernel_.now();
  }
}

namespace {

struct Instance {
  const CacheArray* array;
  std::size_t tier;
};

std::string sharing_name(L2Sharing s) { return s == L2Sharing::kShared ? "shared" : "private"; }

}  // namespace

metrics::Report System::report(nlohmann::ordered_json config_echo) const {
  metrics::Report rep;
  rep.config = std::move(config_echo);
  rep.seed = seed_;
  rep.duration_ps = duration_;
  rep.events_dispatched = kernel_.dispatched_total();

  const double duration_ns = static_cast<double>(duration_) / 1000.0;
  std::vector<double> tier_energy(spec_.tier_stack.size(), 0.0);
  std::vector<double> tier_area(spec_.tier_stack.size(), 0.0);
  std::vector<std::set<std::string>> tier_levels(spec_.tier_stack.size());

  auto add_level = [&](const std::string& name, const std::string& sharing, const std::vector<Instance>& inst) {
    if (inst.empty()) return;
    metrics::LevelReport lv;
    lv.name = name;
    lv.sharing = sharing;
    lv.instances = static_cast<std::uint32_t>(inst.size());
    const CacheArray& first = *inst.front().array;
    lv.capacity_bytes = first.geometry().capacity;
    for (std::size_t r = 0; r < first.region_count(); ++r) {
      metrics::RegionReport rr;
      const auto& reg = first.geometry().regions[r];
      rr.technology = first.region_tech(r).name;
      rr.first_way = reg.first_way;
      rr.end_way = reg.end_way;
      rr.capacity_mib = first.region_capacity_mib(r);
      lv.regions.push_back(rr);
    }
    std::uint64_t hit_latency_sum = 0;
    for (const Instance& i : inst) {
      const CacheArray& a = *i.array;
      const auto& st = a.stats();
      const double busy_ns = static_cast<double>(st.busy_time) / 1000.0;
      const double idle_ns = std::max(0.0, duration_ns - busy_ns);
      for (std::size_t r = 0; r < a.region_count(); ++r) {
        memtech::AccessCounters k{st.regions[r].n_read, st.regions[r].n_write, busy_ns, idle_ns};
        lv.regions[r].counters += k;
        tier_energy[i.tier] += memtech::level_energy(k, a.region_tech(r), a.region_capacity_mib(r), a.write_mix());
        const double area = memtech::area_estimate(a.region_capacity_mib(r), a.region_tech(r));
        lv.regions[r].area += area;
        tier_area[i.tier] += area;
      }
      lv.hits += st.hits;
      lv.misses += st.misses;
      lv.fills += st.fills;
      lv.evictions += st.evictions;
      lv.writebacks += st.writebacks;
      hit_latency_sum += st.hit_latency_sum;
      metrics::EnduranceSummary e;
      e.max_write_count = a.max_write_count();
      e.worn_blocks = a.worn_blocks();
      e.wear_events = st.wear_events.size();
      if (!st.wear_events.empty()) {
        const auto& w = st.wear_events.front();
        e.first_wear_time = w.time;
        e.first_wear_block = w.block;
        e.first_wear_write_count = w.write_count;
      }
      lv.endurance.merge(e);
      tier_levels[i.tier].insert(name);
    }
    for (std::size_t r = 0; r < lv.regions.size(); ++r) {
      auto& rr = lv.regions[r];
      rr.energy_nj = memtech::level_energy(rr.counters, first.region_tech(r), rr.capacity_mib, first.write_mix());
      lv.counters += rr.counters;
      lv.energy_nj += rr.energy_nj;
      lv.area += rr.area;
    }
    // Every region shares the level's busy window; count it once.
    lv.counters.busy_time_ns = lv.regions.front().counters.busy_time_ns;
    lv.counters.idle_time_ns = lv.regions.front().counters.idle_time_ns;
    if (lv.hits > 0) lv.mean_hit_latency_ps = static_cast<double>(hit_latency_sum) / static_cast<double>(lv.hits);
    rep.total_energy_nj += lv.energy_nj;
    rep.endurance.merge(lv.endurance);
    rep.levels.push_back(std::move(lv));
  };

  std::vector<Instance> l1i, l1d, l2, l2i, l3;
  for (std::uint32_t c = 0; c < clusters_.size(); ++c) {
    const Cluster& cl = *clusters_[c];
    const std::size_t core_tier = *spec_.tier_of(TierKind::kCoresL1, c);
    const std::size_t l2_tier = spec_.tier_of(TierKind::kL2SplitId, c).value_or(core_tier);
    const std::size_t l3_tier = spec_.tier_of(TierKind::kL3Unified, c).value_or(l2_tier);
    for (const auto& a : cl.agents()) {
      l1i.push_back({a.l1i.get(), core_tier});
      l1d.push_back({a.l1d.get(), core_tier});
      if (a.l2) l2.push_back({a.l2.get(), l2_tier});
      if (a.l2i) l2i.push_back({a.l2i.get(), l2_tier});
    }
    if (cl.shared_l2()) l2.push_back({cl.shared_l2(), l2_tier});
    if (cl.shared_l2i()) l2i.push_back({cl.shared_l2i(), l2_tier});
    if (cl.l3()) l3.push_back({cl.l3(), l3_tier});
    if (auto m = spec_.tier_of(TierKind::kMemory, c)) tier_levels[*m].insert("memory");
  }
  add_level("L1I", "private", l1i);
  add_level("L1D", "private", l1d);
  add_level("L2I", sharing_name(spec_.l2_sharing), l2i);
  add_level("L2", sharing_name(spec_.l2_sharing), l2);
  add_level("L3", "shared", l3);

  for (std::size_t t = 0; t < spec_.tier_stack.size(); ++t) {
    metrics::TierReport tr;
    tr.index = t;
    tr.kind = std::string(tier_kind_name(spec_.tier_stack[t].kind));
    for (std::uint32_t c = 0; c < spec_.clusters(); ++c)
      if (spec_.tier_owns(spec_.tier_stack[t], c)) tr.clusters.push_back(c);
    tr.levels.assign(tier_levels[t].begin(), tier_levels[t].end());
    tr.area = tier_area[t];
    tr.energy_nj = tier_energy[t];
    if (tr.area > 0.0 && duration_ns > 0.0)
      tr.power_density_mw_per_unit = metrics::tier_power_density(tr.energy_nj, duration_ns, tr.area);
    rep.tiers.push_back(std::move(tr));
  }

  for (const auto& cl : clusters_) {
    const auto& bus = cl->bus();
    rep.bus.transactions += cl->transactions();
    rep.bus.request_grants += bus.channel(BusChannel::kRequest).grants();
    rep.bus.snoop_grants += bus.channel(BusChannel::kSnoop).grants();
    rep.bus.response_grants += bus.channel(BusChannel::kResponse).grants();
    rep.bus.writebacks += cl->bus_writebacks();
    rep.bus.invalidations += cl->invalidations();
    rep.bus.cache_to_cache += cl->cache_to_cache();
    rep.bus.l1_misses += cl->l1_misses();
  }
  if (rep.bus.l1_misses > 0)
    rep.bus.transactions_per_l1_miss =
        static_cast<double>(rep.bus.transactions) / static_cast<double>(rep.bus.l1_misses);

  if (noc_) {
    rep.noc.injected = noc_->injected();
    rep.noc.delivered = noc_->delivered();
    rep.noc.in_flight = noc_->in_flight();
    std::uint64_t hops = 0;
    for (const auto& p : noc_->packets())
      if (p.t_deliver) hops += p.hops;
    if (rep.noc.delivered > 0) rep.noc.mean_hops = static_cast<double>(hops) / static_cast<double>(rep.noc.delivered);
  }

  std::map<std::string, std::vector<Picoseconds>> by_class{{"read", {}}, {"write", {}}, {"message", {}}};
  for (const auto& s : samples_) by_class[s.traffic_class].push_back(s.t_complete - s.t_inject);
  for (const auto& [name, v] : by_class) rep.latency[name] = metrics::summarize_latency(v, options_.latency_bucket);
  rep.samples = samples_;

  const memtech::Catalog defaults = memtech::catalog_default();
  std::set<std::string> volatile_used;
  for (const auto& lv : rep.levels)
    for (const auto& r : lv.regions) {
      const auto& t = memtech::lookup(spec_.technologies, r.technology);
      if (!t.non_volatile && t.standby_power_mw_per_mib > 0.0) volatile_used.insert(t.name);
    }
  for (const auto& name : volatile_used)
    rep.notes.push_back("standby power of " + name + " uses a configurable default, not a measured value");
  if (spec_.cores_per_cluster > 8)
    rep.notes.push_back("cores_per_cluster " + std::to_string(spec_.cores_per_cluster) +
                        " exceeds 8; bus contention may be unrealistic");
  return rep;
}

std::unique_ptr<System> build_system(const SystemSpec& spec, std::uint64_t seed) {
  if (auto v = validate_spec(spec); !v.empty()) throw ConfigError("invalid system: " + v.front().to_string());
  return std::make_unique<System>(spec, seed);
}

}  // namespace tiersim::arch
