#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "numasim/topology.hpp"

namespace numasim {

enum class AccessKind : std::uint8_t { Read, Write };

/// One memory access: issuing core, read/write, physical address.
struct TraceRecord {
  CoreId core = 0;
  AccessKind kind = AccessKind::Read;
  Addr addr = 0;

  bool operator==(const TraceRecord&) const = default;
};

namespace detail {

inline std::string_view next_token(std::string_view& rest) {
  size_t start = rest.find_first_not_of(" \t");
  if (start == std::string_view::npos) {
    rest = {};
    return {};
  }
  size_t end = rest.find_first_of(" \t", start);
  std::string_view tok = rest.substr(start, end == std::string_view::npos
                                                ? std::string_view::npos
                                                : end - start);
  rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
  return tok;
}

}  // namespace detail

/// Parse one record line: `<core> <R|W> <0xHEX>`. Comment/blank skipping is
/// the caller's job (see parse_trace).
inline TraceRecord parse_record(std::string_view line) {
  std::string_view rest = line;
  std::string_view core_tok = detail::next_token(rest);
  std::string_view kind_tok = detail::next_token(rest);
  std::string_view addr_tok = detail::next_token(rest);
  if (core_tok.empty() || kind_tok.empty() || addr_tok.empty())
    throw Error("expected '<core> <R|W> <0xHEX>', got '" + std::string(line) + "'");
  if (!detail::next_token(rest).empty())
    throw Error("trailing tokens after address in '" + std::string(line) + "'");

  TraceRecord rec;
  auto core_res = std::from_chars(core_tok.data(), core_tok.data() + core_tok.size(),
                                  rec.core);
  if (core_res.ec != std::errc{} || core_res.ptr != core_tok.data() + core_tok.size())
    throw Error("bad core index '" + std::string(core_tok) + "'");

  if (kind_tok == "R")
    rec.kind = AccessKind::Read;
  else if (kind_tok == "W")
    rec.kind = AccessKind::Write;
  else
    throw Error("bad access kind '" + std::string(kind_tok) + "' (expected R or W)");

  if (addr_tok.size() < 3 || addr_tok[0] != '0' ||
      (addr_tok[1] != 'x' && addr_tok[1] != 'X'))
    throw Error("bad address '" + std::string(addr_tok) + "' (expected 0x prefix)");
  std::string_view hex = addr_tok.substr(2);
  auto addr_res = std::from_chars(hex.data(), hex.data() + hex.size(), rec.addr, 16);
  if (addr_res.ec != std::errc{} || addr_res.ptr != hex.data() + hex.size())
    throw Error("bad address '" + std::string(addr_tok) + "'");
  return rec;
}

inline std::string emit_record(const TraceRecord& rec) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%u %c 0x%llX", rec.core,
                rec.kind == AccessKind::Write ? 'W' : 'R',
                static_cast<unsigned long long>(rec.addr));
  return std::string(buf);
}

/// Read a whole trace. Blank lines and lines whose first non-blank character
/// is '#' are skipped. Errors carry the 1-based line number. When a topology
/// is given, core and address ranges are validated as well.
inline std::vector<TraceRecord> parse_trace(std::istream& in,
                                            const SystemTopology* topo = nullptr) {
  std::vector<TraceRecord> records;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    TraceRecord rec;
    try {
      rec = parse_record(line);
    } catch (const Error& e) {
      throw Error("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    if (topo) {
      if (rec.core >= topo->num_cores())
        throw Error("trace line " + std::to_string(lineno) + ": core " +
                    std::to_string(rec.core) + " out of range (have " +
                    std::to_string(topo->num_cores()) + " cores)");
      if (rec.addr >= topo->address_limit())
        throw Error("trace line " + std::to_string(lineno) + ": address 0x" +
                    hex16(rec.addr) + " exceeds " +
                    std::to_string(topo->address_bits) + " address bits");
    }
    records.push_back(rec);
  }
  return records;
}

inline std::vector<TraceRecord> load_trace_file(const std::string& path,
                                                const SystemTopology* topo = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file '" + path + "'");
  return parse_trace(in, topo);
}

// ---------------------------------------------------------------------------
// Synthetic trace generation
// ---------------------------------------------------------------------------

struct WorkingSet {
  Addr base = 0;
  std::uint64_t size = 0;  // bytes, line-aligned
};

struct RemoteWorkingSet {
  NodeId home = 0;  // must differ from the issuing core's node
  Addr base = 0;
  std::uint64_t size = 0;
};

enum class AccessPattern : std::uint8_t { UniformRandom, SequentialStride };

/// One phase of a core's access stream. Each record picks the remote working
/// set with probability remote_fraction, is a write with probability
/// write_fraction, and draws its line either uniformly or by a wrapping
/// sequential walk.
struct TracePhase {
  std::uint64_t length = 0;
  WorkingSet local;
  std::optional<RemoteWorkingSet> remote;  // required when remote_fraction > 0
  double remote_fraction = 0.0;
  double write_fraction = 0.0;
  AccessPattern pattern = AccessPattern::UniformRandom;
};

struct CorePlan {
  CoreId core = 0;
  std::vector<TracePhase> phases;
};

struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::vector<CorePlan> cores;
};

namespace detail {

// Self-contained splitmix64 so generated traces do not depend on the standard
// library's distribution implementations.
struct SplitMix64 {
  std::uint64_t state = 0;
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

// Per-core stream seed is a pure function of (master seed, core), so adding
// a core leaves the other cores' streams untouched.
inline SplitMix64 core_stream(std::uint64_t master_seed, CoreId core) {
  return SplitMix64{master_seed + 0x9E3779B97F4A7C15ull * (std::uint64_t(core) + 1)};
}

inline bool draw_fraction(SplitMix64& rng, double fraction) {
  const auto threshold =
      static_cast<std::uint64_t>(fraction * 4294967296.0);  // fraction * 2^32
  return (rng.next() >> 32) < threshold;
}

}  // namespace detail

/// Full validation of a synthetic spec; returns every violation, not just the
/// first.
inline std::vector<std::string> validate_spec(const SyntheticSpec& spec,
                                              const SystemTopology& topo) {
  std::vector<std::string> errs;
  for (auto e : topo.validate()) errs.push_back(e);
  if (!errs.empty()) return errs;  // working-set checks need a sane topology

  std::vector<bool> seen(topo.num_cores(), false);
  for (const auto& plan : spec.cores) {
    const std::string who = "core " + std::to_string(plan.core);
    if (plan.core >= topo.num_cores()) {
      errs.push_back(who + ": core index out of range (have " +
                     std::to_string(topo.num_cores()) + " cores)");
      continue;
    }
    if (seen[plan.core]) errs.push_back(who + ": duplicate core entry");
    seen[plan.core] = true;
    const NodeId node = node_of_core(plan.core, topo);

    for (size_t p = 0; p < plan.phases.size(); ++p) {
      const TracePhase& ph = plan.phases[p];
      const std::string where = who + " phase " + std::to_string(p);
      auto check_ws = [&](const char* name, Addr base, std::uint64_t size,
                          std::optional<NodeId> want_home) {
        if (size == 0 || size % topo.line_size != 0) {
          errs.push_back(where + ": " + name + ".size must be a positive multiple of "
                         "line_size, got " + std::to_string(size));
          return;
        }
        if (base % topo.line_size != 0)
          errs.push_back(where + ": " + name + ".base must be line-aligned");
        if (base + size > topo.address_limit()) {
          errs.push_back(where + ": " + name + " exceeds the address space");
          return;
        }
        if (want_home) {
          NodeId first = home_node_of(base, topo);
          NodeId last = home_node_of(base + size - 1, topo);
          if (first != *want_home || last != *want_home)
            errs.push_back(where + ": " + name + " spans homes " +
                           std::to_string(first) + ".." + std::to_string(last) +
                           " but must be homed at node " + std::to_string(*want_home));
        }
      };

      check_ws("local_working_set", ph.local.base, ph.local.size, node);
      if (ph.remote_fraction < 0.0 || ph.remote_fraction > 1.0)
        errs.push_back(where + ": remote_fraction must be in [0,1], got " +
                       std::to_string(ph.remote_fraction));
      if (ph.write_fraction < 0.0 || ph.write_fraction > 1.0)
        errs.push_back(where + ": write_fraction must be in [0,1], got " +
                       std::to_string(ph.write_fraction));
      if (ph.remote) {
        if (ph.remote->home >= topo.num_sockets)
          errs.push_back(where + ": remote_working_set.home " +
                         std::to_string(ph.remote->home) + " out of range");
        else if (ph.remote->home == node)
          errs.push_back(where + ": remote_working_set must be homed away from the "
                         "issuing core's node " + std::to_string(node));
        else
          check_ws("remote_working_set", ph.remote->base, ph.remote->size,
                   ph.remote->home);
      } else if (ph.remote_fraction > 0.0) {
        errs.push_back(where + ": remote_fraction > 0 requires a remote_working_set");
      }
    }
  }
  return errs;
}

/// Deterministic synthetic trace: per-core streams are derived from the
/// master seed and interleaved round-robin in ascending core order.
inline std::vector<TraceRecord> generate(const SyntheticSpec& spec,
                                         const SystemTopology& topo) {
  auto errs = validate_spec(spec, topo);
  if (!errs.empty()) {
    std::string msg = "invalid trace spec:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw Error(msg);
  }

  std::vector<const CorePlan*> plans;
  for (const auto& plan : spec.cores) plans.push_back(&plan);
  std::sort(plans.begin(), plans.end(),
            [](const CorePlan* a, const CorePlan* b) { return a->core < b->core; });

  std::vector<std::vector<TraceRecord>> streams;
  for (const CorePlan* plan : plans) {
    auto rng = detail::core_stream(spec.seed, plan->core);
    std::vector<TraceRecord> stream;
    for (const TracePhase& ph : plan->phases) {
      std::uint64_t local_cursor = 0, remote_cursor = 0;
      const std::uint64_t local_lines = ph.local.size / topo.line_size;
      const std::uint64_t remote_lines =
          ph.remote ? ph.remote->size / topo.line_size : 0;
      for (std::uint64_t i = 0; i < ph.length; ++i) {
        const bool remote = detail::draw_fraction(rng, ph.remote_fraction);
        const bool write = detail::draw_fraction(rng, ph.write_fraction);
        Addr base;
        std::uint64_t lines;
        std::uint64_t* cursor;
        if (remote) {
          base = ph.remote->base;
          lines = remote_lines;
          cursor = &remote_cursor;
        } else {
          base = ph.local.base;
          lines = local_lines;
          cursor = &local_cursor;
        }
        std::uint64_t idx;
        if (ph.pattern == AccessPattern::UniformRandom)
          idx = rng.next() % lines;
        else
          idx = (*cursor)++ % lines;
        stream.push_back(TraceRecord{plan->core,
                                     write ? AccessKind::Write : AccessKind::Read,
                                     base + idx * topo.line_size});
      }
    }
    streams.push_back(std::move(stream));
  }

  std::vector<TraceRecord> out;
  std::vector<size_t> pos(streams.size(), 0);
  bool any = true;
  while (any) {
    any = false;
    for (size_t s = 0; s < streams.size(); ++s) {
      if (pos[s] < streams[s].size()) {
        out.push_back(streams[s][pos[s]++]);
        any = true;
      }
    }
  }
  return out;
}

}  // namespace numasim
