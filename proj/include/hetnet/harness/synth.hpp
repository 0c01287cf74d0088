#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnet/harness/compare.hpp"
#include "hetnet/harness/config.hpp"
#include "hetnet/harness/measurements.hpp"

namespace hetnet::harness {

struct SynthOptions {
  int hours = 24;
  int cells_per_hour = 60;
  /// Standard deviation of the log of the multiplicative noise.
  double noise = 0.1;
  std::uint64_t seed = 11;
};

/// Cells per tier proportional to lambda_j / lambda (largest remainder).
inline std::vector<int> tier_cell_counts(const GeometryConfig& geo, int cells) {
  const double lambda = geo.total_intensity();
  std::vector<int> counts;
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t j = 0; j < geo.tiers.size(); ++j) {
    const double share = cells * geo.tiers[j].intensity_per_km2 / lambda;
    counts.push_back(static_cast<int>(std::floor(share)));
    assigned += counts.back();
    remainders.emplace_back(share - std::floor(share), j);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](auto a, auto b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < cells; ++k, ++assigned) ++counts[remainders[k % remainders.size()].second];
  return counts;
}

/// Diurnal traffic profile inside [lo, hi]: trough at 04:00, peak at 16:00.
inline double diurnal_rho_bar(int hour, double lo, double hi) {
  const double phase = 2.0 * std::numbers::pi * (hour - 4) / 24.0;
  return lo + (hi - lo) * 0.5 * (1.0 - std::cos(phase));
}

/// Cell-hour rows drawn around the model's per-tier curves with log-normal
/// multiplicative noise. Synthetic stand-in for operator data.
inline std::vector<CellHour> synthesize_measurements(const ScenarioConfig& config, const ModelTable& model,
                                                     const SynthOptions& options) {
  if (options.hours < 1 || options.cells_per_hour < 1 || !(options.noise >= 0.0)) {
    throw std::invalid_argument("synth: hours and cells must be >= 1 and noise >= 0");
  }
  const auto& geo = config.geometry;
  for (const auto& t : geo.tiers) {
    if (!model.has_series(t.name)) throw std::invalid_argument("synth: model has no series '" + t.name + "'");
  }
  const auto counts = tier_cell_counts(geo, options.cells_per_hour);
  const double span = model.max_rho_bar() - model.min_rho_bar();
  const double lo = model.min_rho_bar() + 0.1 * span;
  const double hi = model.max_rho_bar() - 0.1 * span;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, options.noise);
  auto noisy = [&](double v) { return v * std::exp(normal(rng)); };

  std::vector<CellHour> rows;
  for (int h = 0; h < options.hours; ++h) {
    const double x = diurnal_rho_bar(h % 24, lo, hi);
    for (std::size_t j = 0; j < geo.tiers.size(); ++j) {
      const auto& name = geo.tiers[j].name;
      const double traffic = model.at(name, "mean_traffic_kbps", x).value();
      const double load = model.at(name, "mean_load", x).value();
      const double users = model.at(name, "mean_users_stable", x).value();
      if (!std::isfinite(traffic) || !std::isfinite(load) || !std::isfinite(users)) continue;
      for (int c = 0; c < counts[j]; ++c) {
        CellHour m;
        m.hour = h;
        m.tier = name;
        m.traffic_kbps = noisy(traffic);
        m.load = std::min(noisy(load), 0.999);
        m.users = noisy(users);
        rows.push_back(std::move(m));
      }
    }
  }
  return rows;
}

inline void write_measurements_csv(std::ostream& out, const std::vector<CellHour>& rows, const std::string& note) {
  if (!note.empty()) out << "# " << note << '\n';
  out << kMeasurementHeader << '\n';
  for (const auto& m : rows) {
    out << m.hour << ',' << m.tier << ',';
    put_number(out, m.traffic_kbps);
    out << ',';
    put_number(out, m.load);
    out << ',';
    put_number(out, m.users);
    out << '\n';
  }
}

}  // namespace hetnet::harness
