#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hetnet/units.hpp"

namespace hetnet {

/// Steady-state processor-sharing characteristics of one cell, all derived
/// from its traffic demand and load.
struct CellMetrics {
  double traffic_bps = 0.0;     // rho(X)
  double load = 0.0;            // theta(X)
  double critical_bps = 0.0;    // rho_c(X) = rho / theta
  double busy_prob = 0.0;       // p(X) = min(theta, 1)
  double mean_users = 0.0;      // N(X) = rho / r, infinite when unstable
  double throughput_bps = 0.0;  // r(X) = max(rho_c - rho, 0)
  bool stable = true;           // theta < 1
  std::size_t tier = 0;
};

inline CellMetrics cell_metrics(double traffic_bps, double load, std::size_t tier) {
  if (!(traffic_bps >= 0.0) || !(load >= 0.0)) {
    throw std::invalid_argument("cell_metrics: traffic and load must be >= 0");
  }
  CellMetrics m;
  m.traffic_bps = traffic_bps;
  m.load = load;
  m.tier = tier;
  m.busy_prob = std::min(load, 1.0);
  m.stable = load < 1.0;
  if (load == 0.0 || traffic_bps == 0.0) {
    if (load != traffic_bps) {
      throw std::invalid_argument("cell_metrics: zero load with nonzero traffic (or vice versa) is inconsistent");
    }
    // Empty demand: no users, and the critical traffic is not identified.
    m.critical_bps = kInfinity;
    m.throughput_bps = kInfinity;
    m.mean_users = 0.0;
    return m;
  }
  m.critical_bps = traffic_bps / load;
  if (m.stable) {
    m.throughput_bps = std::max(m.critical_bps - traffic_bps, 0.0);
    m.mean_users = traffic_bps / m.throughput_bps;
  } else {
    m.throughput_bps = 0.0;
    m.mean_users = kInfinity;
  }
  return m;
}

/// One cell of one replication, with what the network averages need beyond
/// its metrics.
struct CellSample {
  CellMetrics metrics;
  double surface_km2 = 0.0;
  bool observed = true;  // station inside the observation disc
};

/// Typical-cell estimates from a single replication, for all cells or for
/// one tier.
struct SeriesEstimate {
  std::size_t cells = 0;
  std::size_t stable_cells = 0;
  double mean_traffic_bps = 0.0;        // rho-bar
  double mean_load = 0.0;               // theta-bar
  double stable_fraction = 0.0;         // pi^S: stable surface / surface
  double stable_cell_fraction = 0.0;    // stable cells / cells
  double mean_users_stable = 0.0;       // N-bar = E0[N 1{theta < 1}]
  double mean_user_throughput_bps = 0.0;  // rho-bar pi^S / N-bar
  double stable_traffic_bps = 0.0;      // sum of rho over stable cells
  double stable_users = 0.0;            // sum of N over stable cells

  /// Spatial Little's law read directly off the sample.
  double direct_throughput_bps() const {
    return stable_users > 0.0 ? stable_traffic_bps / stable_users : std::numeric_limits<double>::quiet_NaN();
  }
};

/// Estimates over observed cells of positive surface, optionally restricted
/// to one tier. Empty when no such cell exists.
inline std::optional<SeriesEstimate> estimate_series(std::span<const CellSample> cells,
                                                     std::optional<std::size_t> tier = std::nullopt) {
  SeriesEstimate e;
  double traffic = 0.0;
  double load = 0.0;
  double surface = 0.0;
  double stable_surface = 0.0;
  for (const auto& c : cells) {
    if (!c.observed || !(c.surface_km2 > 0.0)) continue;
    if (tier && c.metrics.tier != *tier) continue;
    ++e.cells;
    traffic += c.metrics.traffic_bps;
    load += c.metrics.load;
    surface += c.surface_km2;
    if (c.metrics.stable) {
      ++e.stable_cells;
      stable_surface += c.surface_km2;
      e.stable_traffic_bps += c.metrics.traffic_bps;
      e.stable_users += c.metrics.mean_users;
    }
  }
  if (e.cells == 0) return std::nullopt;
  const auto n = static_cast<double>(e.cells);
  e.mean_traffic_bps = traffic / n;
  e.mean_load = load / n;
  e.stable_fraction = stable_surface / surface;
  e.stable_cell_fraction = static_cast<double>(e.stable_cells) / n;
  e.mean_users_stable = e.stable_users / n;
  e.mean_user_throughput_bps = e.mean_users_stable > 0.0
                                   ? e.mean_traffic_bps * e.stable_fraction / e.mean_users_stable
                                   : std::numeric_limits<double>::quiet_NaN();
  return e;
}

/// Mean, sample standard deviation and standard error across replications.
struct MetricSummary {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
};

inline MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  double sum = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++s.n;
    }
  }
  if (s.n == 0) return s;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
  }
  s.sd = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
  s.se = s.sd / std::sqrt(static_cast<double>(s.n));
  return s;
}

struct SeriesAverages {
  MetricSummary mean_traffic_bps;
  MetricSummary mean_load;
  MetricSummary stable_fraction;
  MetricSummary stable_cell_fraction;
  MetricSummary mean_users_stable;
  /// Spread of the per-replication throughput estimates.
  MetricSummary mean_user_throughput_bps;
  /// rho-bar pi^S / N-bar from the averaged quantities.
  double throughput_bps = std::numeric_limits<double>::quiet_NaN();
  std::size_t replications = 0;  // replications that had cells in this series
};

/// Network averages per series: index 0 pools all tiers, index j + 1 is tier j.
struct TierAverages {
  std::vector<SeriesAverages> series;
  /// [replication][series] estimates; empty where a replication had no cell.
  std::vector<std::vector<std::optional<SeriesEstimate>>> replications;

  const SeriesAverages& global() const { return series.at(0); }
  const SeriesAverages& tier(std::size_t j) const { return series.at(j + 1); }
};

/// Typical-cell averages over replications. A replication without cells of a
/// tier contributes no sample to that tier.
inline TierAverages network_averages(const std::vector<std::vector<CellSample>>& tables, std::size_t tier_count) {
  TierAverages out;
  const std::size_t series_count = tier_count + 1;
  for (const auto& table : tables) {
    std::vector<std::optional<SeriesEstimate>> row;
    row.push_back(estimate_series(table));
    for (std::size_t j = 0; j < tier_count; ++j) row.push_back(estimate_series(table, j));
    out.replications.push_back(std::move(row));
  }
  out.series.resize(series_count);
  for (std::size_t s = 0; s < series_count; ++s) {
    std::vector<double> traffic, load, stable, stable_cells, users, throughput;
    for (const auto& row : out.replications) {
      if (!row[s]) continue;
      const auto& e = *row[s];
      traffic.push_back(e.mean_traffic_bps);
      load.push_back(e.mean_load);
      stable.push_back(e.stable_fraction);
      stable_cells.push_back(e.stable_cell_fraction);
      users.push_back(e.mean_users_stable);
      throughput.push_back(e.mean_user_throughput_bps);
    }
    auto& a = out.series[s];
    a.replications = traffic.size();
    a.mean_traffic_bps = summarize(traffic);
    a.mean_load = summarize(load);
    a.stable_fraction = summarize(stable);
    a.stable_cell_fraction = summarize(stable_cells);
    a.mean_users_stable = summarize(users);
    a.mean_user_throughput_bps = summarize(throughput);
    if (a.mean_users_stable.n > 0 && a.mean_users_stable.mean > 0.0) {
      a.throughput_bps = a.mean_traffic_bps.mean * a.stable_fraction.mean / a.mean_users_stable.mean;
    }
  }
  return out;
}

}  // namespace hetnet
