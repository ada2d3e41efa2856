#pragma once

// Command-line front end. Exit codes: 0 success, 1 runtime/validation/IO
// failure, 2 usage error.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedspectrum/dataset.hpp"
#include "fedspectrum/engine.hpp"
#include "fedspectrum/report_io.hpp"
#include "fedspectrum/scenario.hpp"

namespace fedspectrum::cli {

enum class Command { run, generate, compare };

struct Invocation {
  Command command = Command::run;
  std::string scenario_path;
  std::string out_dir;
  std::optional<Topology> topology;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::optional<std::int64_t> training_slots;
  std::optional<std::int64_t> eval_slots;
  int sensor_id = 0;
  std::int64_t n_slots = 1000;
  std::string output_name = "dataset.csv";
  bool export_models = false;
  bool sequential = false;
  bool force = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

class OutputDir {
 public:
  OutputDir(std::filesystem::path dir, bool force) : dir_(std::move(dir)), force_(force) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
      throw IoError("cannot create output directory '" + dir_.string() + "'");
  }

  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  /// Fails before anything is written if a target exists and --force is absent.
  void claim(const std::vector<std::string>& names) const {
    if (force_) return;
    for (const auto& n : names)
      if (std::filesystem::exists(path(n)))
        throw IoError("'" + path(n).string() + "' already exists (use --force to overwrite)");
  }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream out(path(name), std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw IoError("cannot write '" + path(name).string() + "'");
  }

 private:
  std::filesystem::path dir_;
  bool force_;
};

inline Scenario load_with_overrides(const Invocation& inv) {
  std::ifstream in(inv.scenario_path, std::ios::binary);
  if (!in) throw FileNotFound(inv.scenario_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str());
  if (inv.seed) s.seed = *inv.seed;
  if (inv.training_slots) s.schedule.n_training_slots = *inv.training_slots;
  if (inv.eval_slots) s.schedule.n_eval_slots = *inv.eval_slots;
  require_valid(s);
  return s;
}

}  // namespace detail

inline int cmd_run(const Invocation& inv, std::ostream& out) {
  const Scenario s = detail::load_with_overrides(inv);
  detail::OutputDir dir(inv.out_dir, inv.force);
  std::vector<std::string> files = {"metrics.csv", "run_summary.json"};
  if (inv.export_models) files.push_back("models.json");
  dir.claim(files);

  const Topology topology = inv.topology.value_or(s.federation.topology);
  out << "fedspectrum: run topology=" << to_string(topology) << " seed=" << s.seed << " sensors=" << s.n_sensors
      << '\n';
  const RunResult r = run_simulation(s, topology, s.seed);

  std::ostringstream csv;
  write_metrics_csv(csv, std::span<const RunResult>(&r, 1));
  dir.write("metrics.csv", csv.str());
  dir.write("run_summary.json", run_summary_json(r).dump(2) + "\n");
  if (inv.export_models) {
    std::string models = "[\n";
    for (std::size_t i = 0; i < r.final_models.size(); ++i)
      models += "  " + model_snapshot_json(r.final_models[i]) + (i + 1 < r.final_models.size() ? ",\n" : "\n");
    dir.write("models.json", models + "]\n");
  }
  out << "fedspectrum: accuracy=" << format_double(r.global.accuracy) << " total_bytes=" << r.traffic.total_bytes
      << " rounds=" << r.federation_rounds << '\n';
  out << "fedspectrum: wrote " << dir.path("metrics.csv").string() << '\n';
  return kExitOk;
}

inline int cmd_generate(const Invocation& inv, std::ostream& out) {
  const Scenario s = detail::load_with_overrides(inv);
  detail::OutputDir dir(inv.out_dir, inv.force);
  dir.claim({inv.output_name});
  auto rng = Rng::derived(s.seed, "dataset", static_cast<std::uint64_t>(inv.sensor_id));
  const auto summary = generate_dataset(s, inv.sensor_id, inv.n_slots, rng, dir.path(inv.output_name));
  out << "fedspectrum: rows_written=" << summary.rows_written
      << " positive_fraction=" << format_double(summary.positive_fraction) << '\n';
  out << "fedspectrum: wrote " << dir.path(inv.output_name).string() << '\n';
  return kExitOk;
}

inline int cmd_compare(const Invocation& inv, std::ostream& out) {
  const Scenario s = detail::load_with_overrides(inv);
  detail::OutputDir dir(inv.out_dir, inv.force);
  dir.claim({"metrics.csv", "comparison.json", "comparison.txt"});

  out << "fedspectrum: compare over " << inv.seeds.size() << " seed(s), " << s.n_sensors << " sensors\n";
  const Comparison c = compare_topologies(s, inv.seeds, !inv.sequential);

  std::ostringstream csv;
  write_metrics_csv(csv, c.runs);
  const std::string table = comparison_table(c.report);
  dir.write("metrics.csv", csv.str());
  dir.write("comparison.json", comparison_json(c.report).dump(2) + "\n");
  dir.write("comparison.txt", table);
  out << table;
  out << "fedspectrum: wrote " << dir.path("comparison.json").string() << '\n';
  return kExitOk;
}

inline int dispatch(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    switch (inv.command) {
      case Command::run: return cmd_run(inv, out);
      case Command::generate: return cmd_generate(inv, out);
      case Command::compare: return cmd_compare(inv, out);
    }
  } catch (const std::exception& e) {
    err << "fedspectrum: error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

/// Parses arguments and runs the selected command.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated spectrum-occupancy detection simulator", "fedspectrum"};
  app.require_subcommand(1);
  Invocation inv;

  const std::vector<std::string> topologies = {"isolated", "gossip", "central"};
  std::string topology_text;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", inv.scenario_path, "Scenario JSON file")->required();
    sub->add_option("--out-dir", inv.out_dir, "Directory for all outputs")->required();
    sub->add_flag("--force", inv.force, "Overwrite existing output files");
  };
  auto slot_overrides = [&](CLI::App* sub) {
    sub->add_option("--training-slots", inv.training_slots, "Override schedule.n_training_slots");
    sub->add_option("--eval-slots", inv.eval_slots, "Override schedule.n_eval_slots");
  };

  auto* run = app.add_subcommand("run", "Run one simulation and write metrics");
  common(run);
  slot_overrides(run);
  run->add_option("--topology", topology_text, "isolated | gossip | central")
      ->required()
      ->check(CLI::IsMember(topologies));
  run->add_option("--seed", inv.seed, "Override the scenario seed");
  run->add_flag("--export-models", inv.export_models, "Also write models.json snapshots");

  auto* gen = app.add_subcommand("generate", "Write a reference dataset CSV for one sensor");
  common(gen);
  gen->add_option("--seed", inv.seed, "Override the scenario seed");
  gen->add_option("--sensor-id", inv.sensor_id, "Sensor whose observations are recorded");
  gen->add_option("--n-slots", inv.n_slots, "Number of slots (rows)")->check(CLI::NonNegativeNumber);
  gen->add_option("--output", inv.output_name, "File name inside the output directory");

  auto* cmp = app.add_subcommand("compare", "Compare isolated, gossip and central over seeds");
  common(cmp);
  slot_overrides(cmp);
  cmp->add_option("--seeds", inv.seeds, "Comma-separated seeds")->required()->delimiter(',');
  cmp->add_flag("--sequential", inv.sequential, "Run simulations one at a time");

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "fedspectrum: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  if (run->parsed()) {
    inv.command = Command::run;
    inv.topology = parse_topology(topology_text);
  } else if (gen->parsed()) {
    inv.command = Command::generate;
  } else {
    inv.command = Command::compare;
    if (inv.seeds.empty()) {
      err << "fedspectrum: --seeds needs at least one seed\n" << app.help();
      return kExitUsage;
    }
  }
  return dispatch(inv, out, err);
}

}  // namespace fedspectrum::cli
