#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hetnet/cellmodel.hpp"
#include "hetnet/geometry.hpp"
#include "hetnet/harness/config.hpp"
#include "hetnet/loadsolver.hpp"
#include "hetnet/meancell.hpp"
#include "hetnet/propagation.hpp"
#include "hetnet/queuemetrics.hpp"
#include "hetnet/ratemodel.hpp"

namespace hetnet::harness {

/// One replication at one sweep point.
struct ReplicationPoint {
  bool ok = false;
  std::string error;
  std::vector<CellSample> cells;  // indexed like the replication's stations
  FixedPointReport report;
};

struct SweepPoint {
  double rho_bar_kbps = 0.0;
  double rho_bps_per_km2 = 0.0;
  /// Set when any replication failed; the point then has no averages.
  bool aborted = false;
  std::string error;
  std::vector<ReplicationPoint> replications;
  TierAverages averages;
  MeanCellSolution mean_cell;

  std::size_t failed() const {
    return static_cast<std::size_t>(
        std::count_if(replications.begin(), replications.end(), [](const auto& r) { return !r.ok; }));
  }
  bool all_converged() const {
    return std::all_of(replications.begin(), replications.end(),
                       [](const auto& r) { return r.ok && r.report.converged; });
  }
};

struct SweepResult {
  ScenarioConfig config;
  /// Stations of each replication (shared by every sweep point).
  std::vector<std::vector<BaseStation>> stations;
  std::vector<std::uint64_t> seeds;
  std::vector<SweepPoint> points;

  bool all_converged() const {
    return std::all_of(points.begin(), points.end(),
                       [](const auto& p) { return p.all_converged() && p.mean_cell.converged; });
  }
  std::size_t aborted_points() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const auto& p) { return p.aborted; }));
  }
};

/// Cell samples for one solved replication; cells of stations outside the
/// observation disc are kept but flagged unobserved.
inline std::vector<CellSample> cell_samples(const NetworkSnapshot& snapshot, const CellMap& cells,
                                            const LoadVector& loads, double rho_bps_per_km2, double obs_radius_km) {
  std::vector<CellSample> out;
  out.reserve(snapshot.stations.size());
  for (std::size_t k = 0; k < snapshot.stations.size(); ++k) {
    const auto& bs = snapshot.stations[k];
    CellSample c;
    c.surface_km2 = cells.surface_km2(k);
    c.observed = norm_km(bs.position) <= obs_radius_km;
    c.metrics = cell_metrics(traffic_demand(cells, k, rho_bps_per_km2), loads[k], bs.tier);
    out.push_back(c);
  }
  return out;
}

/// Gate for the solver: stations inside the observation disc.
inline std::vector<char> observation_gate(const NetworkSnapshot& snapshot, double obs_radius_km) {
  std::vector<char> gate;
  gate.reserve(snapshot.stations.size());
  for (const auto& bs : snapshot.stations) gate.push_back(norm_km(bs.position) <= obs_radius_km ? 1 : 0);
  return gate;
}

/// Called after each replication finishes all sweep points.
using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every replication over every sweep point. Replication r uses seed
/// `seed + r` and the same network at every traffic level, so sweep points
/// share random numbers. Replications run on a small thread pool; results
/// do not depend on the thread count.
inline SweepResult run_sweep(const ScenarioConfig& config, const ProgressCallback& progress = {}) {
  config.validate();
  const auto& geo = config.geometry;
  const ConfiguredRate rate(config.rate, config.rate_table);
  const auto reps = static_cast<std::size_t>(config.replications);

  SweepResult result;
  result.config = config;
  result.stations.resize(reps);
  result.seeds.resize(reps);
  for (std::size_t r = 0; r < reps; ++r) result.seeds[r] = config.seed + r;
  for (double v : config.rho_bar_kbps) {
    SweepPoint p;
    p.rho_bar_kbps = v;
    p.rho_bps_per_km2 = config.rho_bps_per_km2(v);
    p.replications.resize(reps);
    result.points.push_back(std::move(p));
  }

  auto run_replication = [&](std::size_t r) {
    std::optional<NetworkSnapshot> snapshot;
    std::optional<GainTable> gains;
    std::optional<CellMap> cells;
    try {
      snapshot = sample_network(geo, result.seeds[r]);
      gains.emplace(*snapshot, geo);
      cells = assign_cells(*gains);
    } catch (const std::exception& e) {
      for (auto& p : result.points) p.replications[r].error = std::string("network: ") + e.what();
      return;
    }
    result.stations[r] = snapshot->stations;
    SolverOptions options = config.solver;
    options.gate = observation_gate(*snapshot, geo.obs_radius_km);
    for (auto& p : result.points) {
      auto& out = p.replications[r];
      try {
        auto sol = solve_fixed_point(*gains, *cells, p.rho_bps_per_km2, rate, config.pilot_eps, options);
        out.cells = cell_samples(*snapshot, *cells, sol.loads, p.rho_bps_per_km2, geo.obs_radius_km);
        out.report = std::move(sol.report);
        out.ok = true;
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    }
  };

  std::size_t threads = config.threads > 0 ? static_cast<std::size_t>(config.threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, reps);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      run_replication(r);
      const std::size_t d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, reps);
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  const auto samples = draw_mean_cell_samples(geo, config.mean_cell.samples, config.mean_cell.seed,
                                              config.mean_cell.network);
  for (auto& p : result.points) {
    std::vector<std::vector<CellSample>> tables;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& rep = p.replications[r];
      if (rep.ok) {
        tables.push_back(rep.cells);
      } else if (!p.aborted) {
        p.aborted = true;
        p.error = "replication " + std::to_string(r) + ": " + rep.error;
      }
    }
    if (p.aborted) tables.clear();
    p.averages = network_averages(tables, geo.tiers.size());
    p.mean_cell = solve_mean_cell(geo, samples, p.rho_bps_per_km2, rate, config.pilot_eps, config.mean_cell.tol,
                                  config.mean_cell.max_iter);
  }
  return result;
}

}  // namespace hetnet::harness
