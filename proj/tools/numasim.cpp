// numasim — trace-driven simulator for multi-socket cache hierarchies with a
// remote-biased replacement policy. Subcommands: simulate, gen-trace, compare.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "numasim/config.hpp"
#include "numasim/hierarchy.hpp"
#include "numasim/report.hpp"
#include "numasim/trace.hpp"

namespace {

using namespace numasim;

// Write via a sibling temp file + rename so a crashed run never leaves a
// truncated artifact behind.
void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("failed to move '" + tmp.string() + "' to '" + path +
                        "': " + ec.message());
}

int cmd_simulate(const std::string& config_path, const std::string& trace_path,
                 const std::string& policy, const std::string& out_path,
                 const std::string& format) {
  RunConfig cfg = load_run_config(config_path);
  if (!policy.empty()) cfg.hierarchy.mode = policy_kind_from_string(policy);

  const auto records = load_trace_file(trace_path, &cfg.topology);
  SimState state(cfg.topology, cfg.hierarchy);
  const SimReport report = run_trace(state, records);

  write_file_atomic(out_path,
                    format == "csv" ? emit_csv(report) : emit_json(report));

  const CounterBlock& g = report.global;
  const auto a = amat(g);
  std::printf("accesses=%llu l1_misses=%llu amat=%s dram_remote_fetches=%llu\n",
              static_cast<unsigned long long>(g.accesses),
              static_cast<unsigned long long>(l1_misses(g)),
              a ? numasim::detail::fixed6(*a).c_str() : "n/a",
              static_cast<unsigned long long>(g.dram_remote_fetches));
  std::printf("report written to %s\n", out_path.c_str());
  return 0;
}

int cmd_gen_trace(const std::string& spec_path, const std::string& out_path,
                  std::optional<std::uint64_t> seed) {
  TraceSpecFile file = load_trace_spec(spec_path);
  if (seed) file.spec.seed = *seed;

  const auto violations = validate_spec(file.spec, file.topology);
  if (!violations.empty()) {
    std::fprintf(stderr, "error: invalid trace spec '%s':\n", spec_path.c_str());
    for (const auto& v : violations) std::fprintf(stderr, "  %s\n", v.c_str());
    return 1;
  }

  const auto records = generate(file.spec, file.topology);
  std::string text = "# numasim gen-trace seed=" + std::to_string(file.spec.seed) +
                     " records=" + std::to_string(records.size()) + "\n";
  for (const auto& rec : records) text += emit_record(rec) + "\n";
  write_file_atomic(out_path, text);

  std::printf("wrote %zu records to %s\n", records.size(), out_path.c_str());
  return 0;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::string& out_path) {
  const SimReport a = load_report(path_a);
  const SimReport b = load_report(path_b);
  const ReportDiff d = diff(a, b);
  std::fputs(render_diff_table(d).c_str(), stdout);
  if (!out_path.empty()) write_file_atomic(out_path, render_diff_csv(d));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven ccNUMA cache-hierarchy simulator"};
  app.require_subcommand(1);

  std::string config_path, trace_path, policy, out_path, format = "json";
  auto* simulate = app.add_subcommand("simulate", "Run a trace through the hierarchy");
  simulate->add_option("--config", config_path, "Run configuration (JSON)")
      ->required();
  simulate->add_option("--trace", trace_path, "Trace file")->required();
  simulate->add_option("--policy", policy,
                       "Override the config's policy mode (lru|biased|adaptive)")
      ->check(CLI::IsMember({"lru", "biased", "adaptive"}));
  simulate->add_option("--out", out_path, "Report output path")->required();
  simulate->add_option("--format", format, "Report format (default json)")
      ->check(CLI::IsMember({"json", "csv"}));

  std::string spec_path, gen_out;
  std::optional<std::uint64_t> seed;
  auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic trace");
  gen->add_option("--spec", spec_path, "Trace spec (JSON)")->required();
  gen->add_option("--out", gen_out, "Trace output path")->required();
  gen->add_option("--seed", seed, "Override the spec's master seed");

  std::string cmp_a, cmp_b, cmp_out;
  auto* cmp = app.add_subcommand("compare", "Diff two reports from the same trace");
  cmp->add_option("report_a", cmp_a, "Baseline report (JSON)")->required();
  cmp->add_option("report_b", cmp_b, "Comparison report (JSON)")->required();
  cmp->add_option("--out", cmp_out, "Also write the diff as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed())
      return cmd_simulate(config_path, trace_path, policy, out_path, format);
    if (gen->parsed()) return cmd_gen_trace(spec_path, gen_out, seed);
    if (cmp->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_out);
  } catch (const numasim::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const numasim::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
