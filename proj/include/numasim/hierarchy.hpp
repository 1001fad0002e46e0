#pragma once

#include <cassert>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "numasim/adaptive.hpp"
#include "numasim/cache.hpp"
#include "numasim/report.hpp"
#include "numasim/topology.hpp"
#include "numasim/trace.hpp"

namespace numasim {

enum class PolicyKind : std::uint8_t { Lru, Biased, Adaptive };

inline const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Lru: return "lru";
    case PolicyKind::Biased: return "biased";
    case PolicyKind::Adaptive: return "adaptive";
  }
  return "?";
}

inline PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "lru") return PolicyKind::Lru;
  if (s == "biased") return PolicyKind::Biased;
  if (s == "adaptive") return PolicyKind::Adaptive;
  throw Error("unknown policy mode '" + s + "' (expected lru|biased|adaptive)");
}

struct LatencyModel {
  std::uint64_t l1_hit = 4;
  std::uint64_t llc_hit = 30;
  std::uint64_t dram_local = 100;
  std::uint64_t dram_remote = 250;
};

/// Two-level hierarchy: a private L1 per core, a shared inclusive LLC per
/// socket, writeback + write-allocate everywhere. Skip thresholds default to
/// half the level's associativity.
struct HierarchyConfig {
  CacheGeometry l1;
  CacheGeometry llc;
  LatencyModel latencies;
  PolicyKind mode = PolicyKind::Lru;
  std::optional<std::uint32_t> l1_threshold;
  std::optional<std::uint32_t> llc_threshold;
  AdaptiveConfig adaptive;

  std::uint32_t effective_l1_threshold() const {
    return l1_threshold.value_or(l1.associativity / 2);
  }
  std::uint32_t effective_llc_threshold() const {
    return llc_threshold.value_or(llc.associativity / 2);
  }
};

inline std::vector<std::string> validate_hierarchy(const SystemTopology& topo,
                                                   const HierarchyConfig& cfg) {
  std::vector<std::string> errs = topo.validate();
  auto check_geom = [&](const char* name, const CacheGeometry& g) {
    if (!is_pow2(g.num_sets))
      errs.push_back(std::string(name) + ".sets must be a power of two, got " +
                     std::to_string(g.num_sets));
    if (g.associativity < 1)
      errs.push_back(std::string(name) + ".ways must be >= 1");
    if (g.line_size != topo.line_size)
      errs.push_back(std::string(name) + ".line_size " + std::to_string(g.line_size) +
                     " must equal topology.line_size " +
                     std::to_string(topo.line_size));
    else if (is_pow2(g.num_sets) &&
             g.offset_bits() + g.index_bits() + topo.socket_bits() >
                 topo.address_bits)
      errs.push_back(std::string(name) + ": tag too narrow to keep the home bits "
                     "(offset + index + socket bits exceed address_bits)");
  };
  check_geom("l1", cfg.l1);
  check_geom("llc", cfg.llc);
  if (cfg.llc.capacity_lines() <
      cfg.l1.capacity_lines() * std::uint64_t(topo.cores_per_socket))
    errs.push_back("llc capacity must cover all L1s in the socket (inclusion): "
                   "need >= " +
                   std::to_string(cfg.l1.capacity_lines() * topo.cores_per_socket) +
                   " lines, have " + std::to_string(cfg.llc.capacity_lines()));
  const LatencyModel& lat = cfg.latencies;
  if (!(lat.dram_remote >= lat.dram_local && lat.dram_local >= lat.llc_hit &&
        lat.llc_hit >= lat.l1_hit && lat.l1_hit >= 1))
    errs.push_back("latencies must satisfy dram_remote >= dram_local >= llc_hit >= "
                   "l1_hit >= 1");
  if (cfg.adaptive.window < 1)
    errs.push_back("policy.window must be >= 1");
  if (!(cfg.adaptive.low_watermark >= 0.0 &&
        cfg.adaptive.low_watermark < cfg.adaptive.high_watermark &&
        cfg.adaptive.high_watermark <= 1.0))
    errs.push_back("watermarks must satisfy 0 <= low < high <= 1");
  return errs;
}

enum class ServedAt : std::uint8_t { L1, Llc, DramLocal, DramRemote };

enum class CacheLevel : std::uint8_t { L1, Llc };

struct Writeback {
  NodeId home = 0;
  CacheLevel from_level = CacheLevel::L1;

  bool operator==(const Writeback&) const = default;
};

/// Everything one access did: where it was served, its latency, the dirty
/// data it pushed downward, and the victim decisions it forced. Latency is
/// additive over the traversed levels.
struct AccessOutcome {
  ServedAt served_at = ServedAt::L1;
  std::uint64_t latency = 0;
  bool l1_miss_was_remote = false;
  bool bias_was_enabled = false;
  std::vector<Writeback> writebacks;
  std::optional<std::uint32_t> l1_fill_way;
  std::optional<std::uint32_t> llc_fill_way;
  std::optional<VictimDecision> l1_victim;
  std::optional<VictimDecision> llc_victim;
  std::optional<bool> bias_transition;  // new controller state if this miss flipped it
};

/// Full simulation state: per-core L1s, per-socket LLCs, per-core bias
/// controllers. One access at a time, strictly in trace order.
class SimState {
 public:
  SimState(const SystemTopology& topo, const HierarchyConfig& cfg)
      : topo_(topo), cfg_(cfg) {
    auto errs = validate_hierarchy(topo, cfg);
    if (!errs.empty()) {
      std::string msg = "invalid configuration:";
      for (const auto& e : errs) msg += "\n  " + e;
      throw Error(msg);
    }
    for (std::uint32_t c = 0; c < topo.num_cores(); ++c)
      l1s_.emplace_back(cfg.l1);
    for (std::uint32_t s = 0; s < topo.num_sockets; ++s)
      llcs_.emplace_back(cfg.llc);
    controllers_.assign(topo.num_cores(), BiasController(cfg.adaptive));
  }

  AccessOutcome access(const TraceRecord& rec) {
    const std::uint64_t index = records_processed_++;
    if (rec.core >= topo_.num_cores())
      throw Error("record " + std::to_string(index) + ": core " +
                  std::to_string(rec.core) + " out of range (have " +
                  std::to_string(topo_.num_cores()) + " cores)");
    if (rec.addr >= topo_.address_limit())
      throw Error("record " + std::to_string(index) + ": address 0x" +
                  hex16(rec.addr) + " exceeds " +
                  std::to_string(topo_.address_bits) + " address bits");

    const NodeId node = node_of_core(rec.core, topo_);
    const bool is_write = rec.kind == AccessKind::Write;
    Cache& l1 = l1s_[rec.core];
    const DecomposedAddress dl1 = decompose(rec.addr, topo_, l1.geometry());

    AccessOutcome out;

    // L1 probe.
    CacheSetState& l1_set = l1.set(dl1.set_index);
    if (auto way = lookup(l1_set, dl1.tag)) {
      touch_mru(l1_set, *way);
      if (is_write) l1_set.lines[*way].dirty = true;
      out.served_at = ServedAt::L1;
      out.latency = cfg_.latencies.l1_hit;
      out.bias_was_enabled = l1_bias_flag(rec.core);
      return out;
    }

    // L1 miss: classify against the issuing core's node and, in adaptive
    // mode, feed the controller before resolving this miss's bias flag.
    out.l1_miss_was_remote = dl1.home != node;
    if (cfg_.mode == PolicyKind::Adaptive)
      out.bias_transition = controllers_[rec.core].record_miss(out.l1_miss_was_remote);
    const bool l1_bias = l1_bias_flag(rec.core);
    out.bias_was_enabled = l1_bias;

    // LLC probe.
    Cache& llc = llcs_[node];
    const DecomposedAddress dllc = decompose(rec.addr, topo_, llc.geometry());
    CacheSetState& llc_set = llc.set(dllc.set_index);
    if (auto way = lookup(llc_set, dllc.tag)) {
      touch_mru(llc_set, *way);
      out.served_at = ServedAt::Llc;
      out.latency = cfg_.latencies.l1_hit + cfg_.latencies.llc_hit;
      fill_l1(rec.core, node, dl1, is_write, l1_bias, out);
      return out;
    }

    // LLC miss: fetch the line from its home node's DRAM.
    const bool remote_fetch = dllc.home != node;
    out.served_at = remote_fetch ? ServedAt::DramRemote : ServedAt::DramLocal;
    out.latency = cfg_.latencies.l1_hit + cfg_.latencies.llc_hit +
                  (remote_fetch ? cfg_.latencies.dram_remote
                                : cfg_.latencies.dram_local);
    fill_llc(node, dllc, out);
    fill_l1(rec.core, node, dl1, is_write, l1_bias, out);
    return out;
  }

  std::uint64_t records_processed() const { return records_processed_; }
  const SystemTopology& topology() const { return topo_; }
  const HierarchyConfig& config() const { return cfg_; }
  const Cache& l1(CoreId core) const { return l1s_[core]; }
  const Cache& llc(NodeId socket) const { return llcs_[socket]; }
  const BiasController& controller(CoreId core) const { return controllers_[core]; }

  /// Inclusion: every valid L1 line is present in its socket's LLC.
  bool inclusion_holds() const {
    for (CoreId core = 0; core < topo_.num_cores(); ++core) {
      const NodeId socket = node_of_core(core, topo_);
      const Cache& l1 = l1s_[core];
      for (std::uint32_t s = 0; s < l1.num_sets(); ++s) {
        for (const auto& line : l1.set(s).lines) {
          if (!line.valid) continue;
          const Addr addr = recompose(line.tag, s, 0, l1.geometry());
          const DecomposedAddress d = decompose(addr, topo_, cfg_.llc);
          if (!lookup(llcs_[socket].set(d.set_index), d.tag)) return false;
        }
      }
    }
    return true;
  }

 private:
  bool l1_bias_flag(CoreId core) const {
    switch (cfg_.mode) {
      case PolicyKind::Lru: return false;
      case PolicyKind::Biased: return true;
      case PolicyKind::Adaptive: return controllers_[core].bias_enabled();
    }
    return false;
  }

  bool llc_bias_flag(NodeId socket) const {
    switch (cfg_.mode) {
      case PolicyKind::Lru: return false;
      case PolicyKind::Biased: return true;
      case PolicyKind::Adaptive: {
        std::span<const BiasController> socket_ctrls(
            controllers_.data() + std::size_t(socket) * topo_.cores_per_socket,
            topo_.cores_per_socket);
        return shared_bias(socket_ctrls);
      }
    }
    return false;
  }

  PolicyMode l1_policy() const {
    return cfg_.mode == PolicyKind::Lru
               ? PolicyMode::plain_lru()
               : PolicyMode::remote_biased(cfg_.effective_l1_threshold());
  }

  PolicyMode llc_policy() const {
    return cfg_.mode == PolicyKind::Lru
               ? PolicyMode::plain_lru()
               : PolicyMode::remote_biased(cfg_.effective_llc_threshold());
  }

  // Install the line into the core's L1. A dirty victim merges its dirty bit
  // into the socket's LLC copy (inclusion guarantees it is present) and is
  // recorded as an L1-level writeback.
  void fill_l1(CoreId core, NodeId socket, const DecomposedAddress& dl1,
               bool dirty, bool bias, AccessOutcome& out) {
    Cache& l1 = l1s_[core];
    CacheSetState& set = l1.set(dl1.set_index);
    std::uint32_t way;
    if (auto invalid = find_invalid_way(set)) {
      way = *invalid;
    } else {
      const VictimDecision dec = select_victim(set, socket, l1_policy(), bias);
      set.remote_skip_counter = dec.counter_after;
      out.l1_victim = dec;
      way = dec.way;
      const CacheLineState& victim = set.lines[way];
      if (victim.dirty) {
        const Addr vaddr = recompose(victim.tag, dl1.set_index, 0, l1.geometry());
        const DecomposedAddress dv = decompose(vaddr, topo_, cfg_.llc);
        CacheSetState& home_set = llcs_[socket].set(dv.set_index);
        auto llc_way = lookup(home_set, dv.tag);
        if (!llc_way)
          throw Error("internal: inclusion violated for line 0x" + hex16(vaddr));
        home_set.lines[*llc_way].dirty = true;
        out.writebacks.push_back(Writeback{victim.home, CacheLevel::L1});
      }
    }
    apply_fill(set, way, dl1.tag, dl1.home, dirty);
    out.l1_fill_way = way;
  }

  // Install the line into the socket's LLC. An evicted line is first
  // back-invalidated from every L1 in the socket (merging their dirty bits),
  // then written back to its home node if dirty anywhere.
  void fill_llc(NodeId socket, const DecomposedAddress& dllc, AccessOutcome& out) {
    Cache& llc = llcs_[socket];
    CacheSetState& set = llc.set(dllc.set_index);
    std::uint32_t way;
    if (auto invalid = find_invalid_way(set)) {
      way = *invalid;
    } else {
      const VictimDecision dec =
          select_victim(set, socket, llc_policy(), llc_bias_flag(socket));
      set.remote_skip_counter = dec.counter_after;
      out.llc_victim = dec;
      way = dec.way;
      const CacheLineState& victim = set.lines[way];
      const Addr vaddr = recompose(victim.tag, dllc.set_index, 0, llc.geometry());
      bool dirty = victim.dirty;
      const CoreId first_core = socket * topo_.cores_per_socket;
      for (CoreId core = first_core; core < first_core + topo_.cores_per_socket;
           ++core) {
        Cache& l1 = l1s_[core];
        const DecomposedAddress dv = decompose(vaddr, topo_, l1.geometry());
        CacheSetState& l1_set = l1.set(dv.set_index);
        if (auto l1_way = lookup(l1_set, dv.tag)) {
          if (l1_set.lines[*l1_way].dirty) {
            dirty = true;
            out.writebacks.push_back(Writeback{victim.home, CacheLevel::L1});
          }
          l1_set.lines[*l1_way].valid = false;
        }
      }
      if (dirty)
        out.writebacks.push_back(Writeback{victim.home, CacheLevel::Llc});
    }
    apply_fill(set, way, dllc.tag, dllc.home, /*dirty=*/false);
    out.llc_fill_way = way;
  }

  SystemTopology topo_;
  HierarchyConfig cfg_;
  std::vector<Cache> l1s_;
  std::vector<Cache> llcs_;
  std::vector<BiasController> controllers_;
  std::uint64_t records_processed_ = 0;
};

// ---------------------------------------------------------------------------
// Accumulation into a report
// ---------------------------------------------------------------------------

/// Canonical serialization of the policy-invariant run parameters; reports
/// from different policies over the same machine and trace stay comparable.
inline std::string machine_descriptor(const SystemTopology& topo,
                                      const HierarchyConfig& cfg) {
  std::string s;
  s += "sockets=" + std::to_string(topo.num_sockets);
  s += ";cores_per_socket=" + std::to_string(topo.cores_per_socket);
  s += ";address_bits=" + std::to_string(topo.address_bits);
  s += ";line_size=" + std::to_string(topo.line_size);
  s += "|l1:sets=" + std::to_string(cfg.l1.num_sets) +
       ",ways=" + std::to_string(cfg.l1.associativity);
  s += "|llc:sets=" + std::to_string(cfg.llc.num_sets) +
       ",ways=" + std::to_string(cfg.llc.associativity);
  s += "|lat:" + std::to_string(cfg.latencies.l1_hit) + "," +
       std::to_string(cfg.latencies.llc_hit) + "," +
       std::to_string(cfg.latencies.dram_local) + "," +
       std::to_string(cfg.latencies.dram_remote);
  return s;
}

inline std::string machine_digest(const SystemTopology& topo,
                                  const HierarchyConfig& cfg) {
  return hex16(fnv1a64(machine_descriptor(topo, cfg)));
}

/// Digest over the canonical text form of the records, so trace identity is
/// independent of comments and whitespace in the source file.
inline std::string trace_digest(std::span<const TraceRecord> records) {
  std::uint64_t h = kFnvOffset;
  for (const auto& rec : records) {
    h = fnv1a64(emit_record(rec), h);
    h = fnv1a64("\n", h);
  }
  return hex16(h);
}

/// Fold one outcome into the report. `core` is the issuing core; writebacks
/// are classified local/remote against that core's socket. In a single-socket
/// topology no line can be remote, so the bias is inert there and misses are
/// counted as processed without it.
inline void record_outcome(SimReport& report, const AccessOutcome& out, CoreId core,
                           const SystemTopology& topo) {
  const NodeId socket = node_of_core(core, topo);
  auto apply = [&](CounterBlock& c) {
    c.accesses += 1;
    c.total_latency_cycles += out.latency;
    switch (out.served_at) {
      case ServedAt::L1: c.l1_hits += 1; break;
      case ServedAt::Llc: c.llc_hits += 1; break;
      case ServedAt::DramLocal: c.dram_local_fetches += 1; break;
      case ServedAt::DramRemote: c.dram_remote_fetches += 1; break;
    }
    if (out.served_at != ServedAt::L1 && out.bias_was_enabled &&
        topo.num_sockets > 1)
      c.bias_on_misses += 1;
    for (const Writeback& wb : out.writebacks) {
      if (wb.home == socket)
        c.writebacks_local += 1;
      else
        c.writebacks_remote += 1;
    }
    for (const auto& dec : {out.l1_victim, out.llc_victim}) {
      if (!dec) continue;
      if (dec->skipped_remote) c.remote_skip_events += 1;
      if (dec->evicted_remote_due_to_threshold) c.remote_threshold_evictions += 1;
    }
  };
  apply(report.global);
  apply(report.per_core[core]);
}

/// Run a whole trace in order. Identical state + records yield an identical
/// report; record errors abort with the failing index in the message.
inline SimReport run_trace(SimState& state, std::span<const TraceRecord> records) {
  SimReport report;
  report.machine_digest = machine_digest(state.topology(), state.config());
  report.trace_digest = trace_digest(records);
  report.per_core.assign(state.topology().num_cores(), CounterBlock{});
  for (size_t i = 0; i < records.size(); ++i) {
    const AccessOutcome out = state.access(records[i]);
    record_outcome(report, out, records[i].core, state.topology());
    if (out.bias_transition)
      report.bias_transitions.push_back(
          BiasTransition{records[i].core, i, *out.bias_transition});
  }
  return report;
}

}  // namespace numasim
