#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "numasim/hierarchy.hpp"
#include "numasim/report.hpp"
#include "numasim/trace.hpp"

namespace numasim {

struct RunConfig {
  SystemTopology topology;
  HierarchyConfig hierarchy;
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& path) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) known = true;
    if (!known) throw Error("unknown key '" + path + key + "'");
  }
}

inline const json& require_object(const json& parent, const char* key,
                                  const std::string& path) {
  if (!parent.contains(key))
    throw Error("missing required section '" + path + key + "'");
  const json& v = parent.at(key);
  if (!v.is_object())
    throw Error("'" + path + key + "' must be an object");
  return v;
}

inline std::uint64_t get_uint(const json& obj, const char* key,
                              const std::string& path) {
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw Error("'" + path + key + "' must be a non-negative integer");
}

inline std::uint64_t get_uint_or(const json& obj, const char* key,
                                 const std::string& path, std::uint64_t fallback) {
  return obj.contains(key) ? get_uint(obj, key, path) : fallback;
}

inline double get_fraction(const json& obj, const char* key,
                           const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number())
    throw Error("'" + path + key + "' must be a number");
  return v.get<double>();
}

// Addresses may be written as integers or "0x..." strings.
inline Addr get_addr(const json& obj, const char* key, const std::string& path) {
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<Addr>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
      try {
        return std::stoull(s.substr(2), nullptr, 16);
      } catch (const std::exception&) {
        // fall through
      }
    }
    throw Error("'" + path + key + "': bad address '" + s + "'");
  }
  throw Error("'" + path + key + "' must be an unsigned integer or a 0x string");
}

inline SystemTopology topology_from_json(const json& t, const std::string& path) {
  reject_unknown_keys(t, {"num_sockets", "cores_per_socket", "address_bits",
                          "line_size"}, path);
  if (!t.contains("num_sockets"))
    throw Error("missing required key '" + path + "num_sockets'");
  if (!t.contains("cores_per_socket"))
    throw Error("missing required key '" + path + "cores_per_socket'");
  SystemTopology topo;
  topo.num_sockets = static_cast<std::uint32_t>(get_uint(t, "num_sockets", path));
  topo.cores_per_socket =
      static_cast<std::uint32_t>(get_uint(t, "cores_per_socket", path));
  topo.address_bits =
      static_cast<std::uint32_t>(get_uint_or(t, "address_bits", path, 32));
  topo.line_size = static_cast<std::uint32_t>(get_uint_or(t, "line_size", path, 64));
  return topo;
}

inline CacheGeometry geometry_from_json(const json& g, const std::string& path,
                                        std::uint32_t line_size) {
  reject_unknown_keys(g, {"sets", "ways", "line_size"}, path);
  if (!g.contains("sets")) throw Error("missing required key '" + path + "sets'");
  if (!g.contains("ways")) throw Error("missing required key '" + path + "ways'");
  CacheGeometry geom;
  geom.num_sets = static_cast<std::uint32_t>(get_uint(g, "sets", path));
  geom.associativity = static_cast<std::uint32_t>(get_uint(g, "ways", path));
  geom.line_size =
      static_cast<std::uint32_t>(get_uint_or(g, "line_size", path, line_size));
  return geom;
}

}  // namespace detail

/// Strict run-configuration parser: unknown keys are rejected, omitted keys
/// take the documented defaults, and the composed configuration is validated
/// before it is returned.
inline RunConfig run_config_from_json(const nlohmann::json& j) {
  using detail::get_fraction;
  using detail::get_uint;
  using detail::get_uint_or;

  if (!j.is_object()) throw Error("config root must be an object");
  detail::reject_unknown_keys(j, {"topology", "l1", "llc", "latencies", "policy"},
                              "");

  RunConfig cfg;
  cfg.topology = detail::topology_from_json(
      detail::require_object(j, "topology", ""), "topology.");
  cfg.hierarchy.l1 = detail::geometry_from_json(detail::require_object(j, "l1", ""),
                                                "l1.", cfg.topology.line_size);
  cfg.hierarchy.llc = detail::geometry_from_json(
      detail::require_object(j, "llc", ""), "llc.", cfg.topology.line_size);

  if (j.contains("latencies")) {
    const auto& lat = j.at("latencies");
    detail::reject_unknown_keys(lat, {"l1_hit", "llc_hit", "dram_local",
                                      "dram_remote"}, "latencies.");
    LatencyModel m;
    m.l1_hit = get_uint_or(lat, "l1_hit", "latencies.", m.l1_hit);
    m.llc_hit = get_uint_or(lat, "llc_hit", "latencies.", m.llc_hit);
    m.dram_local = get_uint_or(lat, "dram_local", "latencies.", m.dram_local);
    m.dram_remote = get_uint_or(lat, "dram_remote", "latencies.", m.dram_remote);
    cfg.hierarchy.latencies = m;
  }

  if (j.contains("policy")) {
    const auto& pol = j.at("policy");
    detail::reject_unknown_keys(pol, {"mode", "h_l1", "h_llc", "window",
                                      "high_watermark", "low_watermark"},
                                "policy.");
    if (pol.contains("mode")) {
      if (!pol.at("mode").is_string())
        throw Error("'policy.mode' must be a string");
      cfg.hierarchy.mode = policy_kind_from_string(pol.at("mode").get<std::string>());
    }
    if (pol.contains("h_l1"))
      cfg.hierarchy.l1_threshold =
          static_cast<std::uint32_t>(get_uint(pol, "h_l1", "policy."));
    if (pol.contains("h_llc"))
      cfg.hierarchy.llc_threshold =
          static_cast<std::uint32_t>(get_uint(pol, "h_llc", "policy."));
    cfg.hierarchy.adaptive.window = static_cast<std::uint32_t>(
        get_uint_or(pol, "window", "policy.", cfg.hierarchy.adaptive.window));
    if (pol.contains("high_watermark"))
      cfg.hierarchy.adaptive.high_watermark =
          get_fraction(pol, "high_watermark", "policy.");
    if (pol.contains("low_watermark"))
      cfg.hierarchy.adaptive.low_watermark =
          get_fraction(pol, "low_watermark", "policy.");
  }

  auto errs = validate_hierarchy(cfg.topology, cfg.hierarchy);
  if (!errs.empty()) {
    std::string msg = "invalid configuration: " + errs.front();
    for (size_t i = 1; i < errs.size(); ++i) msg += "\n  " + errs[i];
    throw Error(msg);
  }
  return cfg;
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("invalid JSON in '" + path + "': " + e.what());
  }
}

inline RunConfig load_run_config(const std::string& path) {
  try {
    return run_config_from_json(load_json_file(path));
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Synthetic-trace spec files
// ---------------------------------------------------------------------------

struct TraceSpecFile {
  SystemTopology topology;
  SyntheticSpec spec;
};

/// Spec file layout mirrors the run configuration: a topology section, a
/// master seed, and per-core phase lists.
inline TraceSpecFile trace_spec_from_json(const nlohmann::json& j) {
  using detail::get_addr;
  using detail::get_fraction;
  using detail::get_uint;
  using detail::get_uint_or;

  if (!j.is_object()) throw Error("trace spec root must be an object");
  detail::reject_unknown_keys(j, {"topology", "seed", "cores"}, "");

  TraceSpecFile out;
  out.topology = detail::topology_from_json(
      detail::require_object(j, "topology", ""), "topology.");
  out.spec.seed = get_uint_or(j, "seed", "", 0);

  if (!j.contains("cores") || !j.at("cores").is_array())
    throw Error("missing required array 'cores'");
  for (size_t ci = 0; ci < j.at("cores").size(); ++ci) {
    const auto& cj = j.at("cores").at(ci);
    const std::string cpath = "cores[" + std::to_string(ci) + "].";
    if (!cj.is_object()) throw Error("'" + cpath + "' must be an object");
    detail::reject_unknown_keys(cj, {"core", "phases"}, cpath);
    if (!cj.contains("core"))
      throw Error("missing required key '" + cpath + "core'");
    CorePlan plan;
    plan.core = static_cast<CoreId>(get_uint(cj, "core", cpath));
    if (!cj.contains("phases") || !cj.at("phases").is_array())
      throw Error("missing required array '" + cpath + "phases'");
    for (size_t pi = 0; pi < cj.at("phases").size(); ++pi) {
      const auto& pj = cj.at("phases").at(pi);
      const std::string ppath = cpath + "phases[" + std::to_string(pi) + "].";
      if (!pj.is_object()) throw Error("'" + ppath + "' must be an object");
      detail::reject_unknown_keys(pj, {"length", "local", "remote",
                                       "remote_fraction", "write_fraction",
                                       "pattern"}, ppath);
      TracePhase ph;
      if (!pj.contains("length"))
        throw Error("missing required key '" + ppath + "length'");
      ph.length = get_uint(pj, "length", ppath);

      const auto& lj = detail::require_object(pj, "local", ppath);
      detail::reject_unknown_keys(lj, {"base", "size"}, ppath + "local.");
      ph.local.base = get_addr(lj, "base", ppath + "local.");
      ph.local.size = get_uint(lj, "size", ppath + "local.");

      if (pj.contains("remote")) {
        const auto& rj = pj.at("remote");
        detail::reject_unknown_keys(rj, {"home", "base", "size"}, ppath + "remote.");
        RemoteWorkingSet rws;
        rws.home = static_cast<NodeId>(get_uint(rj, "home", ppath + "remote."));
        rws.base = get_addr(rj, "base", ppath + "remote.");
        rws.size = get_uint(rj, "size", ppath + "remote.");
        ph.remote = rws;
      }
      if (pj.contains("remote_fraction"))
        ph.remote_fraction = get_fraction(pj, "remote_fraction", ppath);
      if (pj.contains("write_fraction"))
        ph.write_fraction = get_fraction(pj, "write_fraction", ppath);
      if (pj.contains("pattern")) {
        if (!pj.at("pattern").is_string())
          throw Error("'" + ppath + "pattern' must be a string");
        const std::string p = pj.at("pattern").get<std::string>();
        if (p == "uniform")
          ph.pattern = AccessPattern::UniformRandom;
        else if (p == "stride")
          ph.pattern = AccessPattern::SequentialStride;
        else
          throw Error("'" + ppath + "pattern': expected uniform|stride, got '" + p +
                      "'");
      }
      plan.phases.push_back(ph);
    }
    out.spec.cores.push_back(std::move(plan));
  }
  return out;
}

inline TraceSpecFile load_trace_spec(const std::string& path) {
  try {
    return trace_spec_from_json(load_json_file(path));
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Report files (for compare)
// ---------------------------------------------------------------------------

inline SimReport report_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("schema") ||
      j.at("schema") != "numasim-report-v1")
    throw Error("not a numasim report (missing or wrong 'schema')");
  SimReport r;
  r.machine_digest = j.at("machine_digest").get<std::string>();
  r.trace_digest = j.at("trace_digest").get<std::string>();

  auto block = [](const nlohmann::json& b) {
    CounterBlock c;
    c.accesses = b.at("accesses").get<std::uint64_t>();
    c.l1_hits = b.at("l1_hits").get<std::uint64_t>();
    c.llc_hits = b.at("llc_hits").get<std::uint64_t>();
    c.dram_local_fetches = b.at("dram_local_fetches").get<std::uint64_t>();
    c.dram_remote_fetches = b.at("dram_remote_fetches").get<std::uint64_t>();
    c.writebacks_local = b.at("writebacks_local").get<std::uint64_t>();
    c.writebacks_remote = b.at("writebacks_remote").get<std::uint64_t>();
    c.remote_skip_events = b.at("remote_skip_events").get<std::uint64_t>();
    c.remote_threshold_evictions =
        b.at("remote_threshold_evictions").get<std::uint64_t>();
    c.total_latency_cycles = b.at("total_latency_cycles").get<std::uint64_t>();
    const auto& frac = b.at("bias_on_miss_fraction");
    if (!frac.is_null()) {
      const std::uint64_t misses =
          c.accesses - c.l1_hits;  // reconstruct the integer numerator
      c.bias_on_misses = static_cast<std::uint64_t>(
          frac.get<double>() * static_cast<double>(misses) + 0.5);
    }
    return c;
  };
  r.global = block(j.at("global"));
  for (const auto& b : j.at("per_core")) r.per_core.push_back(block(b));
  if (j.contains("bias_transitions")) {
    for (const auto& t : j.at("bias_transitions"))
      r.bias_transitions.push_back(
          BiasTransition{t.at("core").get<CoreId>(),
                         t.at("record").get<std::uint64_t>(),
                         t.at("state").get<std::string>() == "on"});
  }
  return r;
}

inline SimReport load_report(const std::string& path) {
  try {
    return report_from_json(load_json_file(path));
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": malformed report: " + e.what());
  }
}

}  // namespace numasim
