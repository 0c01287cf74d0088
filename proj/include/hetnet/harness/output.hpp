#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "hetnet/harness/config.hpp"
#include "hetnet/harness/csv.hpp"
#include "hetnet/harness/sweep.hpp"

namespace hetnet::harness {

inline constexpr const char* kTypicalCellHeader =
    "rho_bar_kbps,tier,replications,"
    "mean_traffic_kbps,mean_traffic_kbps_sd,mean_traffic_kbps_se,"
    "mean_load,mean_load_sd,mean_load_se,"
    "stable_fraction,stable_fraction_sd,stable_fraction_se,"
    "mean_users_stable,mean_users_stable_sd,mean_users_stable_se,"
    "mean_user_throughput_kbps,mean_user_throughput_kbps_sd,mean_user_throughput_kbps_se,"
    "stable_cell_fraction,converged";

inline constexpr const char* kMeanCellHeader =
    "rho_bar_kbps,tier,mean_traffic_kbps,mean_load,stable_fraction,mean_users_stable,mean_user_throughput_kbps,"
    "critical_traffic_kbps,saturated,converged";

inline constexpr const char* kSolverDiagnosticsHeader =
    "rho_bar_kbps,replication,iteration,sup_norm_change_lower,sup_norm_change_upper,gap";

inline constexpr const char* kSolverSummaryHeader =
    "rho_bar_kbps,replication,seed,status,iterations,converged,sup_norm_residual,uniqueness_gap,non_unique";

inline constexpr const char* kCellsHeader =
    "rho_bar_kbps,replication,id,tier,x_km,y_km,observed,surface_km2,traffic_kbps,load,critical_traffic_kbps,"
    "busy_prob,users,throughput_kbps,stable";

/// "all" for the pooled series, then the tier names.
inline std::vector<std::string> series_labels(const ScenarioConfig& config) {
  std::vector<std::string> out{"all"};
  for (const auto& t : config.geometry.tiers) out.push_back(t.name);
  return out;
}

namespace detail {

inline void put_summary(std::ostream& out, const MetricSummary& s, double scale) {
  out << ',';
  put_number(out, s.mean * scale);
  out << ',';
  put_number(out, s.sd * scale);
  out << ',';
  put_number(out, s.se * scale);
}

}  // namespace detail

inline void write_typical_cell_csv(std::ostream& out, const SweepResult& result) {
  const auto labels = series_labels(result.config);
  out << kTypicalCellHeader << '\n';
  for (const auto& p : result.points) {
    for (std::size_t s = 0; s < labels.size(); ++s) {
      const auto& a = p.averages.series.at(s);
      put_number(out, p.rho_bar_kbps);
      out << ',' << labels[s] << ',' << a.replications;
      detail::put_summary(out, a.mean_traffic_bps, 1e-3);
      detail::put_summary(out, a.mean_load, 1.0);
      detail::put_summary(out, a.stable_fraction, 1.0);
      detail::put_summary(out, a.mean_users_stable, 1.0);
      // Point value from the averaged quantities; spread from per-replication ratios.
      out << ',';
      put_number(out, a.throughput_bps * 1e-3);
      out << ',';
      put_number(out, a.mean_user_throughput_bps.sd * 1e-3);
      out << ',';
      put_number(out, a.mean_user_throughput_bps.se * 1e-3);
      out << ',';
      put_number(out, a.stable_cell_fraction.mean);
      out << ',' << (p.all_converged() ? 1 : 0) << '\n';
    }
  }
}

struct MeanCellPoint {
  double rho_bar_kbps = 0.0;
  MeanCellSolution solution;
};

inline void write_mean_cell_csv(std::ostream& out, const std::vector<std::string>& labels,
                                const std::vector<MeanCellPoint>& points) {
  out << kMeanCellHeader << '\n';
  for (const auto& p : points) {
    const auto& m = p.solution;
    for (std::size_t s = 0; s < labels.size(); ++s) {
      const auto& t = s == 0 ? m.global : m.tiers.at(s - 1);
      put_number(out, p.rho_bar_kbps);
      out << ',' << labels[s] << ',';
      put_number(out, t.traffic_bps * 1e-3);
      out << ',';
      put_number(out, t.theta);
      out << ',' << (t.saturated ? 0 : 1) << ',';
      put_number(out, t.mean_users);
      out << ',';
      put_number(out, t.throughput_bps * 1e-3);
      out << ',';
      put_number(out, t.critical_bps * 1e-3);
      out << ',' << (t.saturated ? 1 : 0) << ',' << (m.converged ? 1 : 0) << '\n';
    }
  }
}

inline void write_mean_cell_csv(std::ostream& out, const SweepResult& result) {
  std::vector<MeanCellPoint> points;
  for (const auto& p : result.points) points.push_back({p.rho_bar_kbps, p.mean_cell});
  write_mean_cell_csv(out, series_labels(result.config), points);
}

inline void write_solver_diagnostics_csv(std::ostream& out, const SweepResult& result) {
  out << kSolverDiagnosticsHeader << '\n';
  for (const auto& p : result.points) {
    for (std::size_t r = 0; r < p.replications.size(); ++r) {
      for (const auto& h : p.replications[r].report.history) {
        put_number(out, p.rho_bar_kbps);
        out << ',' << r << ',' << h.iteration << ',';
        put_number(out, h.change_lower);
        out << ',';
        put_number(out, h.change_upper);
        out << ',';
        put_number(out, h.gap);
        out << '\n';
      }
    }
  }
}

inline void write_solver_summary_csv(std::ostream& out, const SweepResult& result) {
  out << kSolverSummaryHeader << '\n';
  for (const auto& p : result.points) {
    for (std::size_t r = 0; r < p.replications.size(); ++r) {
      const auto& rep = p.replications[r];
      put_number(out, p.rho_bar_kbps);
      out << ',' << r << ',' << result.seeds.at(r) << ',' << (rep.ok ? "ok" : "failed") << ','
          << rep.report.iterations << ',' << (rep.report.converged ? 1 : 0) << ',';
      put_number(out, rep.report.sup_norm_residual);
      out << ',';
      put_number(out, rep.report.uniqueness_gap);
      out << ',' << (rep.report.non_unique ? 1 : 0) << '\n';
    }
  }
}

inline void write_cells_csv(std::ostream& out, const SweepResult& result) {
  out << kCellsHeader << '\n';
  for (const auto& p : result.points) {
    for (std::size_t r = 0; r < p.replications.size(); ++r) {
      const auto& rep = p.replications[r];
      if (!rep.ok) continue;
      const auto& stations = result.stations.at(r);
      for (std::size_t k = 0; k < rep.cells.size(); ++k) {
        const auto& c = rep.cells[k];
        const auto& m = c.metrics;
        put_number(out, p.rho_bar_kbps);
        out << ',' << r << ',' << stations[k].id << ',' << result.config.geometry.tiers.at(m.tier).name << ',';
        put_number(out, stations[k].position.x_km);
        out << ',';
        put_number(out, stations[k].position.y_km);
        out << ',' << (c.observed ? 1 : 0) << ',';
        put_number(out, c.surface_km2);
        out << ',';
        put_number(out, m.traffic_bps * 1e-3);
        out << ',';
        put_number(out, m.load);
        out << ',';
        put_number(out, m.critical_bps * 1e-3);
        out << ',';
        put_number(out, m.busy_prob);
        out << ',';
        put_number(out, m.mean_users);
        out << ',';
        put_number(out, m.throughput_bps * 1e-3);
        out << ',' << (m.stable ? 1 : 0) << '\n';
      }
    }
  }
}

/// Whitespace-separated blocks, one per series, for gnuplot's `index`.
inline void write_gnuplot_dat(std::ostream& out, const SweepResult& result) {
  const auto labels = series_labels(result.config);
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (s > 0) out << "\n\n";
    out << "# series " << labels[s] << '\n'
        << "# rho_bar_kbps load_mean load_sd stable_fraction_mean stable_fraction_sd users_mean users_sd"
           " throughput_kbps mean_cell_load mean_cell_users mean_cell_throughput_kbps\n";
    for (const auto& p : result.points) {
      const auto& a = p.averages.series.at(s);
      const auto& m = s == 0 ? p.mean_cell.global : p.mean_cell.tiers.at(s - 1);
      for (double v : {p.rho_bar_kbps, a.mean_load.mean, a.mean_load.sd, a.stable_fraction.mean,
                       a.stable_fraction.sd, a.mean_users_stable.mean, a.mean_users_stable.sd,
                       a.throughput_bps * 1e-3, m.theta, m.mean_users, m.throughput_bps * 1e-3}) {
        put_number(out, v);
        out << ' ';
      }
      out << '\n';
    }
  }
}

/// Writes all sweep outputs into `dir` (created if needed); returns the paths.
inline std::vector<std::filesystem::path> write_sweep_outputs(const SweepResult& result,
                                                              const std::filesystem::path& dir, bool gnuplot,
                                                              bool cells = true) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, auto&& writer) {
    const auto path = dir / name;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    writer(out, result);
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
    written.push_back(path);
  };
  emit("typical_cell.csv", write_typical_cell_csv);
  emit("mean_cell.csv", [](std::ostream& o, const SweepResult& r) { write_mean_cell_csv(o, r); });
  emit("solver_diagnostics.csv", write_solver_diagnostics_csv);
  emit("solver_summary.csv", write_solver_summary_csv);
  if (cells) emit("cells.csv", write_cells_csv);
  if (gnuplot) emit("typical_cell.dat", write_gnuplot_dat);
  return written;
}

}  // namespace hetnet::harness
