#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "hetnet/cellmodel.hpp"
#include "hetnet/propagation.hpp"
#include "hetnet/ratemodel.hpp"

namespace hetnet {

/// Per-station cell loads theta(X). Stored uncapped: values >= 1 mark
/// unstable cells and enter interference only through min(theta, 1).
using LoadVector = std::vector<double>;

/// Guard against divergence for pathological rate inputs.
inline constexpr double kLoadCap = 1e6;

/// Right-hand side of the cell load equations:
///   theta(X) = rho * sum_{pixels of V(X)} R^{-1}(SINR(y; min(theta, 1))) * pixel area.
template <RateFunction Rate>
LoadVector load_operator(std::span<const double> theta, const GainTable& gains, const CellMap& cells,
                         double rho_bps_per_km2, const Rate& rate, double pilot_eps) {
  const std::size_t stations = gains.station_count();
  if (theta.size() != stations || cells.station_count() != stations || cells.pixel_count() != gains.pixel_count()) {
    throw std::invalid_argument("load_operator: size mismatch between loads, gains and cells");
  }
  LoadVector out(stations, 0.0);
  if (rho_bps_per_km2 == 0.0) return out;
  const auto weights = interference_weights(theta, pilot_eps);
  const double noise = gains.noise_mw();
  for (std::size_t p = 0; p < gains.pixel_count(); ++p) {
    const std::size_t s = cells.server(p);
    const double snr = gains.gain(p, s) / (noise + gains.interference(p, s, weights));
    out[s] += rate.inverse_rate(snr);
  }
  const double scale = rho_bps_per_km2 * gains.pixel_area_km2();
  for (auto& v : out) v = std::min(scale * v, kLoadCap);
  return out;
}

struct SolverOptions {
  double tol = 1e-4;
  int max_iter = 200;
  /// theta <- (1 - relaxation) theta + relaxation T(theta); 1 is plain Picard.
  double relaxation = 1.0;
  /// Stations that gate convergence and the uniqueness gap (empty: all).
  std::vector<char> gate;

  void validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("solver: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("solver: max_iter must be >= 1");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw std::invalid_argument("solver: relaxation must be in (0, 1]");
  }
};

struct IterationRecord {
  int iteration = 0;
  double change_lower = 0.0;
  double change_upper = 0.0;
  double gap = 0.0;
};

struct FixedPointReport {
  int iterations = 0;
  bool converged = false;
  double sup_norm_residual = 0.0;
  LoadVector lower_solution;
  LoadVector upper_solution;
  double uniqueness_gap = 0.0;
  /// Tracks from 0 and from 1 ended further apart than 10 * tol.
  bool non_unique = false;
  /// Monotonicity audits, checked at every iteration over all stations.
  bool lower_nondecreasing = true;
  bool upper_clamped_nonincreasing = true;
  bool ordered = true;
  std::vector<IterationRecord> history;
};

struct FixedPointSolution {
  LoadVector loads;  // canonical (minimal) solution
  FixedPointReport report;
};

namespace detail {

inline double gated_sup_distance(std::span<const double> a, std::span<const double> b, const std::vector<char>& gate) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!gate.empty() && !gate[k]) continue;
    d = std::max(d, std::abs(a[k] - b[k]));
  }
  return d;
}

inline bool leq_with_slack(double a, double b) { return a <= b + 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace detail

/// Monotone iteration of the load equations from theta = 0 (lower track) and
/// theta = 1 (upper track, full interference). Each track stops once its
/// sup-norm change over gated stations drops below tol. The lower track is
/// the canonical answer; the report keeps both limits and their gap.
template <RateFunction Rate>
FixedPointSolution solve_fixed_point(const GainTable& gains, const CellMap& cells, double rho_bps_per_km2,
                                     const Rate& rate, double pilot_eps, const SolverOptions& options = {}) {
  options.validate();
  const std::size_t n = gains.station_count();
  if (!options.gate.empty() && options.gate.size() != n) throw std::invalid_argument("solver: gate size mismatch");
  const double omega = options.relaxation;

  FixedPointReport report;
  LoadVector lower(n, 0.0);
  LoadVector upper(n, 1.0);
  bool lower_done = false;
  bool upper_done = false;

  auto step = [&](const LoadVector& current) {
    LoadVector next = load_operator(current, gains, cells, rho_bps_per_km2, rate, pilot_eps);
    if (omega != 1.0) {
      for (std::size_t k = 0; k < n; ++k) next[k] = (1.0 - omega) * current[k] + omega * next[k];
    }
    return next;
  };

  for (int it = 1; it <= options.max_iter; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    if (!lower_done) {
      LoadVector next = step(lower);
      for (std::size_t k = 0; k < n; ++k) {
        if (!detail::leq_with_slack(lower[k], next[k])) report.lower_nondecreasing = false;
      }
      rec.change_lower = detail::gated_sup_distance(next, lower, options.gate);
      lower = std::move(next);
      lower_done = rec.change_lower < options.tol;
    }
    if (!upper_done) {
      LoadVector next = step(upper);
      for (std::size_t k = 0; k < n; ++k) {
        if (!detail::leq_with_slack(std::min(next[k], 1.0), std::min(upper[k], 1.0))) {
          report.upper_clamped_nonincreasing = false;
        }
      }
      rec.change_upper = detail::gated_sup_distance(next, upper, options.gate);
      upper = std::move(next);
      upper_done = rec.change_upper < options.tol;
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (!detail::leq_with_slack(lower[k], upper[k])) report.ordered = false;
    }
    rec.gap = detail::gated_sup_distance(lower, upper, options.gate);
    report.history.push_back(rec);
    report.iterations = it;
    if (lower_done && upper_done) break;
  }

  report.converged = lower_done && upper_done;
  const LoadVector image = load_operator(lower, gains, cells, rho_bps_per_km2, rate, pilot_eps);
  report.sup_norm_residual = detail::gated_sup_distance(image, lower, options.gate);
  report.uniqueness_gap = detail::gated_sup_distance(lower, upper, options.gate);
  report.non_unique = report.uniqueness_gap > 10.0 * options.tol;
  report.lower_solution = lower;
  report.upper_solution = std::move(upper);
  return {std::move(lower), std::move(report)};
}

}  // namespace hetnet
