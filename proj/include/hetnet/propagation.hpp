#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "hetnet/geometry.hpp"

namespace hetnet {

/// Distance path loss l(d) = (K d)^beta.
inline double path_loss(double distance_km, double k_per_km, double beta) {
  if (distance_km <= 0.0) return 0.0;
  return std::pow(k_per_km * distance_km, beta);
}

inline double path_loss(double distance_km, const GeometryConfig& config) {
  return path_loss(distance_km, config.pathloss_k_per_km, config.pathloss_beta);
}

/// Path loss with the distance floored at half a pixel, so that the pixel
/// containing a station sees a finite signal.
inline double capped_path_loss(double distance_km, const GeometryConfig& config) {
  return path_loss(std::max(distance_km, 0.5 * config.grid_step_km), config);
}

/// L_X(y): path loss over transmit power times shadowing. `capped` is set when
/// the distance had to be floored (pixel coincides with the station).
struct PropagationLoss {
  double value = 0.0;
  bool capped = false;
};

inline PropagationLoss propagation_loss(const BaseStation& bs, Point pixel, double shadowing,
                                        const GeometryConfig& config) {
  const double d = distance_km(bs.position, pixel);
  const bool capped = d < 0.5 * config.grid_step_km;
  return {capped_path_loss(d, config) / (bs.power_mw * shadowing), capped};
}

inline PropagationLoss propagation_loss(const NetworkSnapshot& snapshot, std::size_t station, std::size_t pixel,
                                        const GeometryConfig& config) {
  return propagation_loss(snapshot.stations[station], snapshot.grid.center(pixel),
                          snapshot.shadowing.at(station, pixel), config);
}

/// Interference weight of a station with activity (load) phi when a fraction
/// eps of its power is always on: min(phi, 1) (1 - eps) + eps.
inline double interference_weight(double activity, double pilot_eps) {
  return std::min(activity, 1.0) * (1.0 - pilot_eps) + pilot_eps;
}

/// Received-power table 1/L_k(y) for every (pixel, station) pair of a
/// snapshot, plus the noise power. Built once per snapshot; only the
/// interference weights change across fixed-point iterations.
class GainTable {
 public:
  GainTable() = default;

  GainTable(const NetworkSnapshot& snapshot, const GeometryConfig& config)
      : pixels_(snapshot.grid.pixel_count()),
        stations_(snapshot.stations.size()),
        pixel_area_km2_(snapshot.grid.pixel_area_km2()),
        noise_mw_(config.noise_mw),
        gains_(pixels_ * stations_) {
    if (snapshot.shadowing.station_count() != stations_ || snapshot.shadowing.pixel_count() != pixels_) {
      throw std::invalid_argument("gain table: shadowing field does not match the snapshot");
    }
    for (std::size_t p = 0; p < pixels_; ++p) {
      const Point y = snapshot.grid.center(p);
      double* row = gains_.data() + p * stations_;
      for (std::size_t k = 0; k < stations_; ++k) {
        const auto& bs = snapshot.stations[k];
        row[k] = bs.power_mw * snapshot.shadowing.at(k, p) / capped_path_loss(distance_km(bs.position, y), config);
      }
    }
  }

  /// Table from explicit propagation losses, laid out [pixel][station].
  static GainTable from_losses(std::size_t pixels, std::size_t stations, std::span<const double> losses,
                               double noise_mw, double pixel_area_km2) {
    if (losses.size() != pixels * stations) throw std::invalid_argument("gain table: loss matrix size mismatch");
    GainTable t;
    t.pixels_ = pixels;
    t.stations_ = stations;
    t.noise_mw_ = noise_mw;
    t.pixel_area_km2_ = pixel_area_km2;
    t.gains_.resize(losses.size());
    std::transform(losses.begin(), losses.end(), t.gains_.begin(), [](double l) { return 1.0 / l; });
    return t;
  }

  std::size_t pixel_count() const { return pixels_; }
  std::size_t station_count() const { return stations_; }
  double noise_mw() const { return noise_mw_; }
  double pixel_area_km2() const { return pixel_area_km2_; }

  double gain(std::size_t pixel, std::size_t station) const { return gains_[pixel * stations_ + station]; }
  std::span<const double> pixel_row(std::size_t pixel) const {
    return {gains_.data() + pixel * stations_, stations_};
  }

  /// Sum over k != serving of weights[k] / L_k(pixel).
  double interference(std::size_t pixel, std::size_t serving, std::span<const double> weights) const {
    const double* row = gains_.data() + pixel * stations_;
    double sum = 0.0;
    for (std::size_t k = 0; k < serving; ++k) sum += weights[k] * row[k];
    for (std::size_t k = serving + 1; k < stations_; ++k) sum += weights[k] * row[k];
    return sum;
  }

 private:
  std::size_t pixels_ = 0;
  std::size_t stations_ = 0;
  double pixel_area_km2_ = 0.0;
  double noise_mw_ = 0.0;
  std::vector<double> gains_;
};

/// Per-station interference weights for a raw activity/load vector.
inline std::vector<double> interference_weights(std::span<const double> activity, double pilot_eps) {
  std::vector<double> w(activity.size());
  std::transform(activity.begin(), activity.end(), w.begin(),
                 [pilot_eps](double a) { return interference_weight(a, pilot_eps); });
  return w;
}

/// Activity-weighted SINR at a pixel served by `serving`. Entries of
/// `activity` above one are clamped; the serving signal itself is unweighted.
inline double sinr(const GainTable& gains, std::size_t pixel, std::size_t serving, std::span<const double> activity,
                   double pilot_eps) {
  if (activity.size() != gains.station_count()) {
    throw std::invalid_argument("sinr: activity vector size does not match the station count");
  }
  const auto w = interference_weights(activity, pilot_eps);
  return gains.gain(pixel, serving) / (gains.noise_mw() + gains.interference(pixel, serving, w));
}

}  // namespace hetnet
