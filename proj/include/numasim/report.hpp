#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "numasim/common.hpp"

namespace numasim {

/// Counter set kept once globally and once per core.
struct CounterBlock {
  std::uint64_t accesses = 0;
  std::uint64_t l1_hits = 0;
  std::uint64_t llc_hits = 0;
  std::uint64_t dram_local_fetches = 0;
  std::uint64_t dram_remote_fetches = 0;
  std::uint64_t writebacks_local = 0;
  std::uint64_t writebacks_remote = 0;
  std::uint64_t remote_skip_events = 0;
  std::uint64_t remote_threshold_evictions = 0;
  std::uint64_t total_latency_cycles = 0;
  std::uint64_t bias_on_misses = 0;  // misses processed with the bias in effect

  bool operator==(const CounterBlock&) const = default;
};

inline std::uint64_t l1_misses(const CounterBlock& c) {
  return c.accesses - c.l1_hits;
}

/// Mean cycles per access; absent for an empty trace.
inline std::optional<double> amat(const CounterBlock& c) {
  if (c.accesses == 0) return std::nullopt;
  return static_cast<double>(c.total_latency_cycles) /
         static_cast<double>(c.accesses);
}

inline std::optional<double> bias_on_miss_fraction(const CounterBlock& c) {
  const std::uint64_t misses = l1_misses(c);
  if (misses == 0) return std::nullopt;
  return static_cast<double>(c.bias_on_misses) / static_cast<double>(misses);
}

struct BiasTransition {
  CoreId core = 0;
  std::uint64_t record_index = 0;
  bool on = false;

  bool operator==(const BiasTransition&) const = default;
};

/// The unit of policy comparison. The two digests identify the machine
/// (topology, geometries, latencies) and the trace, so reports from different
/// experiments cannot be diffed against each other by accident. Policy
/// settings are deliberately not part of either digest.
struct SimReport {
  std::string machine_digest;
  std::string trace_digest;
  CounterBlock global;
  std::vector<CounterBlock> per_core;
  std::vector<BiasTransition> bias_transitions;

  bool operator==(const SimReport&) const = default;
};

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return std::string(buf);
}

inline std::string opt6(const std::optional<double>& v, const char* absent) {
  return v ? fixed6(*v) : std::string(absent);
}

// Counter fields in emission order. Derived values (l1_misses, fraction,
// amat) are emitted too so downstream tooling never recomputes them.
inline void counter_fields(const CounterBlock& c,
                           std::vector<std::pair<std::string, std::string>>& out) {
  auto num = [](std::uint64_t v) { return std::to_string(v); };
  out.emplace_back("accesses", num(c.accesses));
  out.emplace_back("l1_hits", num(c.l1_hits));
  out.emplace_back("l1_misses", num(l1_misses(c)));
  out.emplace_back("llc_hits", num(c.llc_hits));
  out.emplace_back("dram_local_fetches", num(c.dram_local_fetches));
  out.emplace_back("dram_remote_fetches", num(c.dram_remote_fetches));
  out.emplace_back("writebacks_local", num(c.writebacks_local));
  out.emplace_back("writebacks_remote", num(c.writebacks_remote));
  out.emplace_back("remote_skip_events", num(c.remote_skip_events));
  out.emplace_back("remote_threshold_evictions", num(c.remote_threshold_evictions));
  out.emplace_back("total_latency_cycles", num(c.total_latency_cycles));
  out.emplace_back("bias_on_miss_fraction", opt6(bias_on_miss_fraction(c), "null"));
  out.emplace_back("amat", opt6(amat(c), "null"));
}

}  // namespace detail

/// Canonical report serialization. Emitted by hand so the byte stream is
/// stable: fixed field order, integers verbatim, fractions with exactly six
/// decimals, absent values as null.
inline std::string emit_json(const SimReport& r) {
  std::string out;
  out += "{\n";
  out += "  \"schema\": \"numasim-report-v1\",\n";
  out += "  \"machine_digest\": \"" + r.machine_digest + "\",\n";
  out += "  \"trace_digest\": \"" + r.trace_digest + "\",\n";

  // Appends one counter object starting at the current position; `indent` is
  // the indentation of the opening brace.
  auto emit_block = [&](const CounterBlock& c, const std::string& indent,
                        std::optional<std::uint32_t> core_id) {
    std::vector<std::pair<std::string, std::string>> fields;
    detail::counter_fields(c, fields);
    out += "{\n";
    if (core_id)
      out += indent + "  \"core\": " + std::to_string(*core_id) + ",\n";
    for (size_t i = 0; i < fields.size(); ++i) {
      out += indent + "  \"" + fields[i].first + "\": " + fields[i].second;
      out += i + 1 < fields.size() ? ",\n" : "\n";
    }
    out += indent + "}";
  };

  out += "  \"global\": ";
  emit_block(r.global, "  ", std::nullopt);
  out += ",\n  \"per_core\": [\n";
  for (size_t core = 0; core < r.per_core.size(); ++core) {
    out += "    ";
    emit_block(r.per_core[core], "    ", static_cast<std::uint32_t>(core));
    out += core + 1 < r.per_core.size() ? ",\n" : "\n";
  }
  out += "  ],\n";
  out += "  \"bias_transitions\": [";
  for (size_t i = 0; i < r.bias_transitions.size(); ++i) {
    const auto& t = r.bias_transitions[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    { \"core\": " + std::to_string(t.core) +
           ", \"record\": " + std::to_string(t.record_index) + ", \"state\": \"" +
           (t.on ? "on" : "off") + "\" }";
  }
  out += r.bias_transitions.empty() ? "]\n" : "\n  ]\n";
  out += "}\n";
  return out;
}

/// Flat counter export: one row for the global block, one per core.
inline std::string emit_csv(const SimReport& r) {
  std::vector<std::pair<std::string, std::string>> fields;
  detail::counter_fields(r.global, fields);

  std::string out = "scope,core";
  for (const auto& [name, _] : fields) out += "," + name;
  out += "\n";

  auto emit_row = [&](const std::string& scope, const std::string& core,
                      const CounterBlock& c) {
    std::vector<std::pair<std::string, std::string>> row;
    detail::counter_fields(c, row);
    out += scope + "," + core;
    for (const auto& [_, value] : row) out += "," + (value == "null" ? "" : value);
    out += "\n";
  };

  emit_row("global", "", r.global);
  for (size_t core = 0; core < r.per_core.size(); ++core)
    emit_row("core", std::to_string(core), r.per_core[core]);
  return out;
}

// ---------------------------------------------------------------------------
// Report comparison
// ---------------------------------------------------------------------------

struct DiffRow {
  std::string name;
  std::optional<double> a;
  std::optional<double> b;
};

struct ReportDiff {
  std::vector<DiffRow> rows;
};

/// Per-counter comparison of two reports from the same machine and trace
/// (b relative to a). Mismatched digests are refused.
inline ReportDiff diff(const SimReport& a, const SimReport& b) {
  if (a.machine_digest != b.machine_digest)
    throw Error("reports come from different machine configurations (digest " +
                a.machine_digest + " vs " + b.machine_digest + ")");
  if (a.trace_digest != b.trace_digest)
    throw Error("reports come from different traces (digest " + a.trace_digest +
                " vs " + b.trace_digest + ")");

  auto val = [](std::uint64_t v) -> std::optional<double> {
    return static_cast<double>(v);
  };
  ReportDiff d;
  auto push = [&](const std::string& name, std::optional<double> av,
                  std::optional<double> bv) {
    d.rows.push_back(DiffRow{name, av, bv});
  };
  const CounterBlock& ca = a.global;
  const CounterBlock& cb = b.global;
  push("accesses", val(ca.accesses), val(cb.accesses));
  push("l1_hits", val(ca.l1_hits), val(cb.l1_hits));
  push("l1_misses", val(l1_misses(ca)), val(l1_misses(cb)));
  push("llc_hits", val(ca.llc_hits), val(cb.llc_hits));
  push("dram_local_fetches", val(ca.dram_local_fetches), val(cb.dram_local_fetches));
  push("dram_remote_fetches", val(ca.dram_remote_fetches),
       val(cb.dram_remote_fetches));
  push("writebacks_local", val(ca.writebacks_local), val(cb.writebacks_local));
  push("writebacks_remote", val(ca.writebacks_remote), val(cb.writebacks_remote));
  push("remote_skip_events", val(ca.remote_skip_events), val(cb.remote_skip_events));
  push("remote_threshold_evictions", val(ca.remote_threshold_evictions),
       val(cb.remote_threshold_evictions));
  push("total_latency_cycles", val(ca.total_latency_cycles),
       val(cb.total_latency_cycles));
  push("bias_on_miss_fraction", bias_on_miss_fraction(ca),
       bias_on_miss_fraction(cb));
  push("amat", amat(ca), amat(cb));
  return d;
}

inline std::string render_diff_table(const ReportDiff& d) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-28s %16s %16s %14s %10s\n", "counter", "a", "b",
                "delta", "delta%");
  out += buf;
  for (const auto& row : d.rows) {
    std::string a = detail::opt6(row.a, "n/a");
    std::string b = detail::opt6(row.b, "n/a");
    std::string delta = "n/a", pct = "n/a";
    if (row.a && row.b) {
      delta = detail::fixed6(*row.b - *row.a);
      if (*row.a != 0.0) {
        char p[32];
        std::snprintf(p, sizeof(p), "%+.2f%%", (*row.b - *row.a) / *row.a * 100.0);
        pct = p;
      } else if (*row.b == 0.0) {
        pct = "+0.00%";
      }
    }
    std::snprintf(buf, sizeof(buf), "%-28s %16s %16s %14s %10s\n", row.name.c_str(),
                  a.c_str(), b.c_str(), delta.c_str(), pct.c_str());
    out += buf;
  }
  return out;
}

inline std::string render_diff_csv(const ReportDiff& d) {
  std::string out = "counter,a,b,delta,delta_pct\n";
  for (const auto& row : d.rows) {
    out += row.name + ",";
    out += (row.a ? detail::fixed6(*row.a) : "") + ",";
    out += (row.b ? detail::fixed6(*row.b) : "") + ",";
    if (row.a && row.b) {
      out += detail::fixed6(*row.b - *row.a) + ",";
      if (*row.a != 0.0)
        out += detail::fixed6((*row.b - *row.a) / *row.a * 100.0);
      else if (*row.b == 0.0)
        out += "0.000000";
    } else {
      out += ",";
    }
    out += "\n";
  }
  return out;
}

}  // namespace numasim
