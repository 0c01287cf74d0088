// hetnet: traffic sweeps, mean-cell solves, network snapshots and
// measurement comparison for multi-tier cellular networks.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetnet/cellmodel.hpp"
#include "hetnet/geometry.hpp"
#include "hetnet/harness/compare.hpp"
#include "hetnet/harness/config.hpp"
#include "hetnet/harness/csv.hpp"
#include "hetnet/harness/measurements.hpp"
#include "hetnet/harness/output.hpp"
#include "hetnet/harness/sweep.hpp"
#include "hetnet/harness/synth.hpp"
#include "hetnet/loadsolver.hpp"
#include "hetnet/meancell.hpp"
#include "hetnet/propagation.hpp"

namespace fs = std::filesystem;
using namespace hetnet;
using namespace hetnet::harness;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 2, kConvergence = 3, kIo = 4, kInternal = 1 };

// Values given on the command line; unset ones leave the file or default.
struct Overrides {
  std::optional<std::string> config_path;
  std::vector<double> rho_bar;
  std::optional<int> replications;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  bool gnuplot = false;
  bool lookup_table = false;
  std::optional<std::string> network;
  std::optional<std::size_t> samples;
};

void add_scenario_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "Scenario YAML file (defaults built in)");
  cmd->add_option("--rho-bar", o.rho_bar, "Traffic per cell in kbit/s (comma separated)")->delimiter(',');
  cmd->add_flag("--lookup-table", o.lookup_table, "Use the tabulated rate function");
}

ScenarioConfig resolve(const Overrides& o) {
  ScenarioConfig cfg = o.config_path ? load_scenario(*o.config_path) : ScenarioConfig{};
  if (!o.rho_bar.empty()) cfg.rho_bar_kbps = o.rho_bar;
  if (o.replications) cfg.replications = *o.replications;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.out) cfg.output_dir = *o.out;
  if (o.gnuplot) cfg.gnuplot = true;
  if (o.lookup_table) cfg.rate_table = true;
  if (o.samples) cfg.mean_cell.samples = *o.samples;
  if (o.network) {
    if (*o.network == "equivalent") {
      cfg.mean_cell.network = MeanCellNetwork::equivalent;
    } else if (*o.network == "heterogeneous") {
      cfg.mean_cell.network = MeanCellNetwork::heterogeneous;
    } else {
      throw ConfigError("--network: expected 'equivalent' or 'heterogeneous'");
    }
  }
  cfg.validate();
  return cfg;
}

std::vector<std::string> tier_names(const ScenarioConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& t : cfg.geometry.tiers) out.push_back(t.name);
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

int cmd_sweep(const Overrides& o, bool cells, bool quiet) {
  const auto cfg = resolve(o);
  const auto result = run_sweep(cfg, [&](std::size_t done, std::size_t total) {
    if (!quiet) std::cerr << "\rreplications " << done << '/' << total << std::flush;
  });
  if (!quiet) std::cerr << '\n';
  const auto files = write_sweep_outputs(result, cfg.output_dir, cfg.gnuplot, cells);
  for (const auto& f : files) std::cout << f.string() << '\n';

  int code = kOk;
  for (const auto& p : result.points) {
    if (p.aborted) {
      std::cerr << "warning: sweep point " << p.rho_bar_kbps << " kbps aborted: " << p.error << '\n';
      code = kConvergence;
    } else if (!p.all_converged()) {
      std::cerr << "warning: load iteration did not converge at " << p.rho_bar_kbps << " kbps\n";
      code = kConvergence;
    }
    if (!p.mean_cell.converged) {
      std::cerr << "warning: mean cell did not converge at " << p.rho_bar_kbps << " kbps\n";
      code = kConvergence;
    }
  }
  return code;
}

int cmd_meancell(const Overrides& o) {
  const auto cfg = resolve(o);
  const ConfiguredRate rate(cfg.rate, cfg.rate_table);
  const auto samples =
      draw_mean_cell_samples(cfg.geometry, cfg.mean_cell.samples, cfg.mean_cell.seed, cfg.mean_cell.network);
  std::vector<MeanCellPoint> points;
  bool converged = true;
  for (double v : cfg.rho_bar_kbps) {
    auto sol = solve_mean_cell(cfg.geometry, samples, cfg.rho_bps_per_km2(v), rate, cfg.pilot_eps, cfg.mean_cell.tol,
                               cfg.mean_cell.max_iter);
    converged = converged && sol.converged;
    points.push_back({v, std::move(sol)});
  }
  std::vector<std::string> labels{"all"};
  for (const auto& n : tier_names(cfg)) labels.push_back(n);
  if (o.out) {
    auto out = open_output(fs::path(*o.out) / "mean_cell.csv");
    write_mean_cell_csv(out, labels, points);
    std::cout << (fs::path(*o.out) / "mean_cell.csv").string() << '\n';
  } else {
    write_mean_cell_csv(std::cout, labels, points);
  }
  if (!converged) {
    std::cerr << "warning: mean cell iteration did not converge at some traffic levels\n";
    return kConvergence;
  }
  return kOk;
}

int cmd_snapshot(const Overrides& o) {
  const auto cfg = resolve(o);
  const fs::path dir = o.out.value_or(cfg.output_dir);
  const auto snapshot = sample_network(cfg.geometry, cfg.seed);
  const GainTable gains(snapshot, cfg.geometry);
  const auto cells = assign_cells(gains);
  {
    auto out = open_output(dir / "pixel_map.csv");
    write_pixel_map_csv(out, snapshot, cells);
  }
  {
    auto out = open_output(dir / "stations.csv");
    write_station_csv(out, snapshot);
  }
  {
    auto out = open_output(dir / "cell_table.csv");
    write_cell_table_csv(out, snapshot, cells, o.rho_bar.empty() ? 0.0 : cfg.rho_bps_per_km2(o.rho_bar.front()));
  }
  for (const char* f : {"stations.csv", "pixel_map.csv", "cell_table.csv"}) std::cout << (dir / f).string() << '\n';
  std::cout << "stations " << snapshot.stations.size() << ", pixels " << gains.pixel_count() << '\n';
  return kOk;
}

int cmd_ingest(const Overrides& o, const std::string& input) {
  const auto cfg = resolve(o);
  auto in = open_input(input);
  const auto rows = read_measurements(in, input, tier_names(cfg));
  const auto hourly = hourly_series(rows);
  if (o.out) {
    auto out = open_output(*o.out);
    write_hourly_csv(out, hourly);
  } else {
    write_hourly_csv(std::cout, hourly);
  }
  return kOk;
}

int cmd_compare(const Overrides& o, const std::string& measurements, const std::string& model_path,
                bool load_with_pilot) {
  const auto cfg = resolve(o);
  auto in = open_input(measurements);
  const auto hourly = hourly_series(read_measurements(in, measurements, tier_names(cfg)));
  auto model_in = open_input(model_path);
  const auto model = ModelTable::read(model_in, model_path);
  const auto c = compare(hourly, model, CompareOptions{load_with_pilot, cfg.pilot_eps});
  const fs::path dir = o.out.value_or(cfg.output_dir);
  {
    auto out = open_output(dir / "residuals.csv");
    write_residuals_csv(out, c);
  }
  {
    auto out = open_output(dir / "compare_summary.csv");
    write_summary_csv(out, c);
  }
  write_summary_csv(std::cout, c);
  if (const auto n = c.extrapolated(); n > 0) {
    std::cerr << "warning: " << n << " points fall outside the model sweep and were not compared\n";
  }
  return kOk;
}

int cmd_synth(const Overrides& o, const std::string& model_path, const SynthOptions& options) {
  const auto cfg = resolve(o);
  auto model_in = open_input(model_path);
  const auto model = ModelTable::read(model_in, model_path);
  const auto rows = synthesize_measurements(cfg, model, options);
  const std::string note = "SYNTHETIC measurements generated from model table " +
                           fs::path(model_path).filename().string() + " with log-normal noise sd " +
                           std::to_string(options.noise) + ", seed " + std::to_string(options.seed) +
                           "; not field data";
  if (o.out) {
    auto out = open_output(*o.out);
    write_measurements_csv(out, rows, note);
  } else {
    write_measurements_csv(std::cout, rows, note);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow-level performance of multi-tier cellular networks"};
  app.require_subcommand(1);

  Overrides o;
  bool no_cells = false;
  bool quiet = false;
  bool load_with_pilot = false;
  std::string input, measurements, model;
  SynthOptions synth;

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over traffic per cell, plus the mean cell");
  add_scenario_options(sweep, o);
  sweep->add_option("-r,--replications", o.replications, "Replications per sweep point");
  sweep->add_option("-s,--seed", o.seed, "Base seed (replication r uses seed + r)");
  sweep->add_option("-j,--threads", o.threads, "Worker threads (0: all cores)");
  sweep->add_option("-o,--out", o.out, "Output directory");
  sweep->add_flag("--gnuplot", o.gnuplot, "Also write typical_cell.dat");
  sweep->add_flag("--no-cells", no_cells, "Skip the per-cell table");
  sweep->add_flag("-q,--quiet", quiet, "No progress output");

  auto* meancell = app.add_subcommand("meancell", "Solve the mean cell only");
  add_scenario_options(meancell, o);
  meancell->add_option("--samples", o.samples, "Monte Carlo samples of the typical user");
  meancell->add_option("--network", o.network, "equivalent | heterogeneous");
  meancell->add_option("-o,--out", o.out, "Output directory (default: stdout)");

  auto* snapshot = app.add_subcommand("snapshot", "Dump one network realization");
  add_scenario_options(snapshot, o);
  snapshot->add_option("-s,--seed", o.seed, "Network seed");
  snapshot->add_option("-o,--out", o.out, "Output directory");

  auto* ingest = app.add_subcommand("ingest", "Validate measurements and print hourly means");
  ingest->add_option("-c,--config", o.config_path, "Scenario YAML file (tier labels)");
  ingest->add_option("input", input, "Measurement CSV")->required();
  ingest->add_option("-o,--out", o.out, "Output CSV (default: stdout)");

  auto* cmp = app.add_subcommand("compare", "Residuals of measurements against a model table");
  cmp->add_option("-c,--config", o.config_path, "Scenario YAML file (tier labels)");
  cmp->add_option("-m,--measurements", measurements, "Measurement CSV")->required();
  cmp->add_option("--model", model, "typical_cell.csv or mean_cell.csv")->required();
  cmp->add_option("-o,--out", o.out, "Output directory");
  cmp->add_flag("--load-with-pilot", load_with_pilot, "Measured load includes the always-on pilot share");

  auto* syn = app.add_subcommand("synth", "Synthetic measurements from a model table");
  syn->add_option("-c,--config", o.config_path, "Scenario YAML file (tiers)");
  syn->add_option("--model", model, "typical_cell.csv or mean_cell.csv")->required();
  syn->add_option("--hours", synth.hours, "Hours to generate");
  syn->add_option("--cells", synth.cells_per_hour, "Cells per hour");
  syn->add_option("--noise", synth.noise, "Log-normal noise standard deviation");
  syn->add_option("--seed", synth.seed, "Noise seed");
  syn->add_option("-o,--out", o.out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*sweep) return cmd_sweep(o, !no_cells, quiet);
    if (*meancell) return cmd_meancell(o);
    if (*snapshot) return cmd_snapshot(o);
    if (*ingest) return cmd_ingest(o, input);
    if (*cmp) return cmd_compare(o, measurements, model, load_with_pilot);
    if (*syn) return cmd_synth(o, model, synth);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
