#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnet/geometry.hpp"
#include "hetnet/loadsolver.hpp"
#include "hetnet/propagation.hpp"
#include "hetnet/queuemetrics.hpp"
#include "hetnet/ratemodel.hpp"

namespace hetnet {

/// E[S^{2/beta}] for log-normal shadowing with E[10 log10 S] = 0.
inline double shadow_moment(double sigma_db, double beta) {
  if (sigma_db < 0.0) throw std::invalid_argument("shadow_moment: sigma must be >= 0");
  const double s = (2.0 / beta) * sigma_db * std::numbers::ln10 / 10.0;
  return std::exp(0.5 * s * s);
}

/// E[S] for the same shadowing law.
inline double shadow_mean(double sigma_db) {
  const double s = sigma_db * std::numbers::ln10 / 10.0;
  return std::exp(0.5 * s * s);
}

/// Power of the single-tier network with the same propagation-loss process
/// at a point: P = (sum_j (lambda_j / lambda) P_j^{2/beta})^{beta/2}, in mW.
inline double equivalent_power(const GeometryConfig& config) {
  if (config.tiers.empty()) throw std::invalid_argument("equivalent_power: no tiers");
  const double beta = config.pathloss_beta;
  const double lambda = config.total_intensity();
  double mean = 0.0;
  for (const auto& t : config.tiers) mean += (t.intensity_per_km2 / lambda) * std::pow(t.power_mw, 2.0 / beta);
  return std::pow(mean, beta / 2.0);
}

/// (P_j / P)^{2/beta}: per-tier scaling of traffic and load relative to the
/// network average.
inline std::vector<double> tier_power_ratios(const GeometryConfig& config) {
  const double p = std::pow(equivalent_power(config), 2.0 / config.pathloss_beta);
  std::vector<double> out;
  for (const auto& t : config.tiers) out.push_back(std::pow(t.power_mw, 2.0 / config.pathloss_beta) / p);
  return out;
}

/// a_j = pi E[S^{2/beta}] / K^2 * lambda_j P_j^{2/beta}: the propagation-loss
/// values seen from a point form a Poisson process with intensity measure
/// a_j t^{2/beta} per tier.
struct EquivalentNetwork {
  double power_mw = 0.0;
  std::vector<double> coefficients;
  double total_coefficient = 0.0;
  double shadow_moment = 1.0;

  double selection_probability(std::size_t j) const { return coefficients.at(j) / total_coefficient; }

  /// P(min_n L_n(0) > t) = exp(-a t^{2/beta}).
  double min_loss_survival(double t, double beta) const {
    return std::exp(-total_coefficient * std::pow(t, 2.0 / beta));
  }
};

inline EquivalentNetwork equivalent_network(const GeometryConfig& config) {
  EquivalentNetwork eq;
  const double beta = config.pathloss_beta;
  const double k = config.pathloss_k_per_km;
  eq.power_mw = equivalent_power(config);
  eq.shadow_moment = shadow_moment(config.shadow_sigma_db, beta);
  for (const auto& t : config.tiers) {
    const double a = std::numbers::pi * eq.shadow_moment / (k * k) * t.intensity_per_km2 *
                     std::pow(t.power_mw, 2.0 / beta);
    eq.coefficients.push_back(a);
    eq.total_coefficient += a;
  }
  return eq;
}

/// Probability that the station serving a fixed location is of tier j:
/// a_j / a.
inline double tier_selection_probability(const GeometryConfig& config, std::size_t j) {
  if (j >= config.tiers.size()) throw std::out_of_range("tier index out of range");
  return equivalent_network(config).selection_probability(j);
}

/// Which network the mean-cell expectation is sampled from.
enum class MeanCellNetwork {
  equivalent,     // single power P, artificial tier labels drawn with a_j / a
  heterogeneous,  // the actual tiers with their own powers
};

/// Pre-drawn Monte Carlo samples of the typical user's radio situation:
/// serving gain 1/L_{X*}(0) and, per tier label, the summed gains of the
/// other stations. Reused across iterations (common random numbers).
struct MeanCellSampleSet {
  std::size_t tiers = 0;
  std::vector<double> serving_gain;
  std::vector<double> interference;  // [sample * tiers + j]
  /// Expected per-tier interference from stations outside the sampling disc.
  std::vector<double> tail;

  std::size_t size() const { return serving_gain.size(); }
  double tier_interference(std::size_t sample, std::size_t j) const { return interference[sample * tiers + j]; }
};

/// Expected summed gain of stations beyond radius R for a Poisson field of
/// intensity lambda and power P: 2 pi lambda P E[S] K^{-beta} R^{2-beta} / (beta - 2).
inline double outer_interference(const GeometryConfig& config, double intensity, double power_mw) {
  const double beta = config.pathloss_beta;
  return 2.0 * std::numbers::pi * intensity * power_mw * shadow_mean(config.shadow_sigma_db) *
         std::pow(config.pathloss_k_per_km, -beta) * std::pow(config.sim_radius_km, 2.0 - beta) / (beta - 2.0);
}

inline MeanCellSampleSet draw_mean_cell_samples(const GeometryConfig& config, std::size_t samples,
                                                std::uint64_t seed,
                                                MeanCellNetwork network = MeanCellNetwork::equivalent) {
  config.validate();
  if (samples < 1) throw std::invalid_argument("mean cell: at least one sample is required");
  const std::size_t tiers = config.tiers.size();
  const auto eq = equivalent_network(config);
  const double lambda = config.total_intensity();

  MeanCellSampleSet set;
  set.tiers = tiers;
  set.serving_gain.reserve(samples);
  set.interference.reserve(samples * tiers);

  std::vector<double> label_weights;
  std::vector<double> label_power;
  for (std::size_t j = 0; j < tiers; ++j) {
    if (network == MeanCellNetwork::equivalent) {
      label_weights.push_back(eq.coefficients[j]);
      label_power.push_back(eq.power_mw);
      set.tail.push_back(outer_interference(config, lambda, eq.power_mw) * eq.selection_probability(j));
    } else {
      label_weights.push_back(config.tiers[j].intensity_per_km2);
      label_power.push_back(config.tiers[j].power_mw);
      set.tail.push_back(outer_interference(config, config.tiers[j].intensity_per_km2, config.tiers[j].power_mw));
    }
  }

  auto rng = detail::make_rng(seed, 0x6d65616eULL);
  std::poisson_distribution<std::int64_t> count_dist(config.expected_station_count());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::discrete_distribution<std::size_t> label_dist(label_weights.begin(), label_weights.end());
  const double sigma_ln = config.shadow_sigma_db * std::numbers::ln10 / 10.0;

  std::vector<double> gains;
  std::vector<std::size_t> labels;
  for (std::size_t s = 0; s < samples; ++s) {
    std::int64_t count = 0;
    // The typical user always has a server; condition on a non-empty disc.
    while (count == 0) count = count_dist(rng);
    gains.resize(static_cast<std::size_t>(count));
    labels.resize(static_cast<std::size_t>(count));
    std::size_t best = 0;
    for (std::size_t n = 0; n < gains.size(); ++n) {
      const double r = config.sim_radius_km * std::sqrt(unit(rng));
      const double shadow = std::exp(sigma_ln * normal(rng));
      labels[n] = label_dist(rng);
      gains[n] = label_power[labels[n]] * shadow / capped_path_loss(r, config);
      if (gains[n] > gains[best]) best = n;
    }
    set.serving_gain.push_back(gains[best]);
    const std::size_t offset = set.interference.size();
    set.interference.resize(offset + tiers, 0.0);
    for (std::size_t n = 0; n < gains.size(); ++n) {
      if (n != best) set.interference[offset + labels[n]] += gains[n];
    }
  }
  return set;
}

struct MeanCellTier {
  double theta = 0.0;             // theta~_j
  double traffic_bps = 0.0;       // rho~_j
  double critical_bps = 0.0;      // rho~c_j
  double throughput_bps = 0.0;    // r~_j
  double mean_users = 0.0;        // N~_j
  bool saturated = false;         // theta~_j >= 1
};

struct MeanCellSolution {
  double theta = 0.0;  // theta~
  MeanCellTier global;
  std::vector<MeanCellTier> tiers;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool saturated = false;  // theta~ >= 1: the mean cell is unstable
};

struct MeanCellOptions {
  std::size_t samples = 20000;
  std::uint64_t seed = 7;
  double tol = 1e-6;
  int max_iter = 5000;
  MeanCellNetwork network = MeanCellNetwork::equivalent;
};

/// E[R^{-1}(SINR)] over the samples when the global mean load is theta.
/// Interferers labelled j are weighted by min(theta (P_j/P)^{2/beta}, 1)(1 - eps) + eps.
template <RateFunction Rate>
double mean_inverse_rate(double theta, const MeanCellSampleSet& samples, const std::vector<double>& power_ratios,
                         double noise_mw, const Rate& rate, double pilot_eps) {
  std::vector<double> weights(samples.tiers);
  for (std::size_t j = 0; j < samples.tiers; ++j) {
    weights[j] = interference_weight(theta * power_ratios[j], pilot_eps);
  }
  double tail = 0.0;
  for (std::size_t j = 0; j < samples.tiers; ++j) tail += weights[j] * samples.tail[j];
  double sum = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    double interference = tail;
    for (std::size_t j = 0; j < samples.tiers; ++j) interference += weights[j] * samples.tier_interference(s, j);
    sum += rate.inverse_rate(samples.serving_gain[s] / (noise_mw + interference));
  }
  return sum / static_cast<double>(samples.size());
}

namespace detail {

inline MeanCellTier mean_cell_chain(double traffic_bps, double theta, double harmonic_rate_bps) {
  MeanCellTier t;
  t.traffic_bps = traffic_bps;
  t.theta = theta;
  t.saturated = theta >= 1.0;
  // At zero traffic the ratio is 0/0; its limit is the harmonic-mean rate.
  t.critical_bps = theta > 0.0 ? traffic_bps / theta : harmonic_rate_bps;
  t.throughput_bps = t.saturated ? 0.0 : std::max(t.critical_bps - traffic_bps, 0.0);
  if (t.saturated || t.throughput_bps == 0.0) {
    t.mean_users = traffic_bps > 0.0 ? kInfinity : 0.0;
  } else {
    t.mean_users = traffic_bps / t.throughput_bps;
  }
  return t;
}

}  // namespace detail

/// Scalar mean-cell load equation
///   theta~ = (rho / lambda) E[R^{-1}(SINR(theta~))]
/// solved by monotone Picard iteration from 0 on a fixed sample set.
template <RateFunction Rate>
MeanCellSolution solve_mean_cell(const GeometryConfig& config, const MeanCellSampleSet& samples,
                                 double rho_bps_per_km2, const Rate& rate, double pilot_eps, double tol = 1e-6,
                                 int max_iter = 5000) {
  if (!(tol > 0.0)) throw std::invalid_argument("mean cell: tol must be > 0");
  if (samples.size() == 0 || samples.tiers != config.tiers.size()) {
    throw std::invalid_argument("mean cell: sample set does not match the configuration");
  }
  const auto ratios = tier_power_ratios(config);
  const double rho_bar = rho_bps_per_km2 / config.total_intensity();
  auto map = [&](double theta) {
    if (rho_bar == 0.0) return 0.0;
    return std::min(rho_bar * mean_inverse_rate(theta, samples, ratios, config.noise_mw, rate, pilot_eps), kLoadCap);
  };

  MeanCellSolution sol;
  double theta = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const double next = map(theta);
    sol.iterations = it;
    const double change = std::abs(next - theta);
    theta = next;
    if (change < tol * std::max(1.0, theta)) {
      sol.converged = true;
      break;
    }
  }
  sol.theta = theta;
  sol.residual = std::abs(map(theta) - theta);
  sol.saturated = theta >= 1.0;
  const double harmonic =
      1.0 / mean_inverse_rate(theta, samples, ratios, config.noise_mw, rate, pilot_eps);
  sol.global = detail::mean_cell_chain(rho_bar, theta, harmonic);
  for (std::size_t j = 0; j < ratios.size(); ++j) {
    sol.tiers.push_back(detail::mean_cell_chain(rho_bar * ratios[j], theta * ratios[j], harmonic));
  }
  return sol;
}

template <RateFunction Rate>
MeanCellSolution solve_mean_cell(const GeometryConfig& config, double rho_bps_per_km2, const Rate& rate,
                                 double pilot_eps, const MeanCellOptions& options = {}) {
  const auto samples = draw_mean_cell_samples(config, options.samples, options.seed, options.network);
  return solve_mean_cell(config, samples, rho_bps_per_km2, rate, pilot_eps, options.tol, options.max_iter);
}

}  // namespace hetnet
