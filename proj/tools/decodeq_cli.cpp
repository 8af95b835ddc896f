// Command-line front end: single runs, regime sweeps, metric recomputation
// and figure-data export.
//
// Exit codes: 0 success, 1 validation error (bad config, arguments or
// artifacts), 2 invariant violation inside the simulator.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "decodeq/decodeq.hpp"

using namespace decodeq;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitInvariant = 2;

int cmd_run(const std::string& config_path, const std::optional<std::string>& out) {
  RunConfig config = parse_config(read_file(config_path));
  fs::path dir;
  if (out) {
    dir = *out;
  } else if (!config.output_dir.empty()) {
    dir = config.output_dir;
  } else {
    const std::string name =
        config.label.empty() ? fs::path(config_path).stem().string() : config.label;
    dir = default_output_root() / name;
  }
  const RunLog log = run(config);
  const ServiceMetrics m = emit_artifacts(log, config, dir);
  std::cout << summary_text(m);
  std::cerr << "wrote " << dir.string() << "\n";
  return 0;
}

int cmd_sweep(const std::string& regime, const std::optional<std::string>& out,
              std::uint64_t seed, unsigned threads) {
  SweepOptions opt;
  opt.seed = seed;
  opt.threads = threads;
  opt.out_dir = out ? fs::path(*out) : default_output_root() / ("sweep-" + regime);
  std::string table;
  if (regime == "sram-fit") table = sram_fit_table(run_sram_fit_sweep(opt));
  else if (regime == "tail") table = tail_table(run_tail_sweep(opt));
  else if (regime == "qos") table = qos_table(run_qos_sweep(opt));
  else if (regime == "capacity") table = capacity_table(run_capacity_sweep(opt));
  else throw ConfigError("unknown regime '" + regime + "'");
  std::cout << table;
  std::cerr << "wrote " << opt.out_dir->string() << "\n";
  return 0;
}

// Prints the recomputed summary. A disagreement with the archived
// summary.json means the artifacts are internally inconsistent.
int cmd_recompute(const std::string& run_dir) {
  const std::string text = summary_text(recompute(run_dir));
  std::cout << text;
  const fs::path stored = fs::path(run_dir) / "summary.json";
  if (fs::exists(stored) && read_file(stored) != text) {
    std::cerr << "error: recomputed metrics differ from " << stored.string() << "\n";
    return kExitInvariant;
  }
  return 0;
}

int cmd_plot_data(const std::string& sweep_dir) {
  for (const auto& p : plot_data(sweep_dir)) std::cout << p.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deadline-driven decoding service simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> run_out;
  auto* run_cmd = app.add_subcommand("run", "Simulate one configuration and write its artifacts");
  run_cmd->add_option("config", config_path, "Run configuration (JSON)")->required();
  run_cmd->add_option("--out", run_out, "Artifact directory");

  std::string regime;
  std::optional<std::string> sweep_out;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a regime sweep");
  sweep_cmd->add_option("regime", regime, "Regime to sweep")
      ->required()
      ->check(CLI::IsMember({"sram-fit", "tail", "qos", "capacity"}));
  sweep_cmd->add_option("--out", sweep_out, "Sweep directory");
  sweep_cmd->add_option("--seed", seed, "Master seed shared by every cell");
  sweep_cmd->add_option("--threads", threads, "Worker threads (0: all cores)");

  std::string run_dir;
  auto* metrics_cmd = app.add_subcommand("metrics", "Metric utilities");
  metrics_cmd->require_subcommand(1);
  auto* recompute_cmd =
      metrics_cmd->add_subcommand("recompute", "Recompute summary metrics from a run directory");
  recompute_cmd->add_option("run-dir", run_dir, "Run directory")->required();

  std::string sweep_dir;
  auto* plot_cmd = app.add_subcommand("plot-data", "Write figure-ready CSVs for a sweep");
  plot_cmd->add_option("sweep-dir", sweep_dir, "Sweep directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, run_out);
    if (*sweep_cmd) return cmd_sweep(regime, sweep_out, seed, threads);
    if (*recompute_cmd) return cmd_recompute(run_dir);
    if (*plot_cmd) return cmd_plot_data(sweep_dir);
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
