#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnet/random_field.hpp"
#include "hetnet/units.hpp"

namespace hetnet {

/// One class of base stations sharing a density and a transmit power.
struct TierConfig {
  std::string name;
  double intensity_per_km2 = 0.0;
  double power_mw = 0.0;
};

struct GeometryConfig {
  std::vector<TierConfig> tiers;
  double sim_radius_km = 2.63;
  double obs_radius_km = 2.13;
  double grid_step_km = 0.05;
  double pathloss_k_per_km = 7117.0;
  double pathloss_beta = 3.8;
  double shadow_sigma_db = 10.0;
  double shadow_corr_km = 0.05;
  double noise_mw = dbm_to_mw(-96.0);

  double total_intensity() const {
    double sum = 0.0;
    for (const auto& t : tiers) sum += t.intensity_per_km2;
    return sum;
  }

  double expected_station_count() const {
    return total_intensity() * std::numbers::pi * sim_radius_km * sim_radius_km;
  }

  void validate() const {
    if (tiers.empty()) throw std::invalid_argument("geometry: at least one tier is required");
    for (const auto& t : tiers) {
      if (!(t.intensity_per_km2 >= 0.0)) {
        throw std::invalid_argument("geometry: tier '" + t.name + "' intensity must be >= 0");
      }
      if (!(t.power_mw > 0.0)) {
        throw std::invalid_argument("geometry: tier '" + t.name + "' power must be > 0");
      }
    }
    if (!(total_intensity() > 0.0)) throw std::invalid_argument("geometry: total intensity must be > 0");
    if (!(sim_radius_km > 0.0) || !(obs_radius_km > 0.0)) {
      throw std::invalid_argument("geometry: radii must be > 0");
    }
    if (!(obs_radius_km < sim_radius_km)) {
      throw std::invalid_argument("geometry: obs_radius must be smaller than sim_radius");
    }
    if (!(grid_step_km > 0.0)) throw std::invalid_argument("geometry: grid_step must be > 0");
    if (!(pathloss_k_per_km > 0.0)) throw std::invalid_argument("geometry: pathloss K must be > 0");
    if (!(pathloss_beta > 2.0)) throw std::invalid_argument("geometry: pathloss beta must be > 2");
    if (!(shadow_sigma_db >= 0.0)) throw std::invalid_argument("geometry: shadowing sigma must be >= 0");
    if (!(shadow_corr_km >= 0.0)) {
      throw std::invalid_argument("geometry: shadowing correlation distance must be >= 0");
    }
    if (!(noise_mw >= 0.0)) throw std::invalid_argument("geometry: noise must be >= 0");
  }
};

/// Two-tier macro/micro deployment used throughout the numerical study:
/// lambda = 4.62 /km^2 split with lambda_micro / lambda_macro = 0.039.
inline GeometryConfig default_geometry() {
  GeometryConfig cfg;
  const double lambda = 4.62;
  const double ratio = 0.039;
  const double macro = lambda / (1.0 + ratio);
  cfg.tiers = {
      TierConfig{"macro", macro, dbm_to_mw(58.26)},
      TierConfig{"micro", lambda - macro, dbm_to_mw(47.42)},
  };
  return cfg;
}

/// Square raster of pixel centres (i * step, j * step), restricted to the
/// centres that fall inside a disc. Disc pixels are numbered 0..pixel_count-1
/// in raster order.
class Grid {
 public:
  Grid() = default;

  Grid(double radius_km, double step_km) : radius_km_(radius_km), step_km_(step_km) {
    if (!(radius_km > 0.0) || !(step_km > 0.0)) {
      throw std::invalid_argument("grid: radius and step must be > 0");
    }
    half_ = static_cast<int>(std::floor(radius_km / step_km + 1e-9));
    const int side = 2 * half_ + 1;
    pixel_of_raster_.assign(static_cast<std::size_t>(side) * static_cast<std::size_t>(side), -1);
    for (int row = 0; row < side; ++row) {
      for (int col = 0; col < side; ++col) {
        const Point c{(col - half_) * step_km, (row - half_) * step_km};
        if (norm_km(c) <= radius_km * (1.0 + 1e-12)) {
          const auto raster = static_cast<std::size_t>(row * side + col);
          pixel_of_raster_[raster] = static_cast<std::int64_t>(centers_.size());
          centers_.push_back(c);
          raster_of_pixel_.push_back(raster);
        }
      }
    }
  }

  double radius_km() const { return radius_km_; }
  double step_km() const { return step_km_; }
  double pixel_area_km2() const { return step_km_ * step_km_; }
  int half_extent() const { return half_; }
  int side() const { return 2 * half_ + 1; }
  std::size_t pixel_count() const { return centers_.size(); }
  Point center(std::size_t pixel) const { return centers_[pixel]; }
  std::size_t raster_index(std::size_t pixel) const { return raster_of_pixel_[pixel]; }
  double gridded_area_km2() const { return static_cast<double>(pixel_count()) * pixel_area_km2(); }

  /// Disc pixel whose centre is nearest to p, if that centre lies in the disc.
  std::optional<std::size_t> pixel_at(Point p) const {
    const int col = static_cast<int>(std::lround(p.x_km / step_km_)) + half_;
    const int row = static_cast<int>(std::lround(p.y_km / step_km_)) + half_;
    if (col < 0 || row < 0 || col >= side() || row >= side()) return std::nullopt;
    const auto idx = pixel_of_raster_[static_cast<std::size_t>(row * side() + col)];
    if (idx < 0) return std::nullopt;
    return static_cast<std::size_t>(idx);
  }

  /// Pixel indices of the up/down/left/right neighbours inside the disc.
  std::vector<std::size_t> neighbours(std::size_t pixel) const {
    std::vector<std::size_t> out;
    const auto raster = raster_of_pixel_[pixel];
    const int s = side();
    const int row = static_cast<int>(raster) / s;
    const int col = static_cast<int>(raster) % s;
    const int dr[] = {-1, 1, 0, 0};
    const int dc[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const int r = row + dr[k];
      const int c = col + dc[k];
      if (r < 0 || c < 0 || r >= s || c >= s) continue;
      const auto idx = pixel_of_raster_[static_cast<std::size_t>(r * s + c)];
      if (idx >= 0) out.push_back(static_cast<std::size_t>(idx));
    }
    return out;
  }

 private:
  double radius_km_ = 0.0;
  double step_km_ = 0.0;
  int half_ = 0;
  std::vector<Point> centers_;
  std::vector<std::size_t> raster_of_pixel_;
  std::vector<std::int64_t> pixel_of_raster_;
};

struct BaseStation {
  std::uint32_t id = 0;
  Point position;
  std::size_t tier = 0;  // 0-based index into GeometryConfig::tiers
  double power_mw = 0.0;
};

/// Linear shadowing multipliers S_n(y - X_n), one row of grid pixels per
/// station.
class ShadowingField {
 public:
  ShadowingField() = default;
  ShadowingField(std::size_t stations, std::size_t pixels, double fill = 1.0)
      : stations_(stations), pixels_(pixels), values_(stations * pixels, fill) {}

  std::size_t station_count() const { return stations_; }
  std::size_t pixel_count() const { return pixels_; }

  double at(std::size_t station, std::size_t pixel) const { return values_[station * pixels_ + pixel]; }
  double& at(std::size_t station, std::size_t pixel) { return values_[station * pixels_ + pixel]; }

  std::span<const double> row(std::size_t station) const {
    return {values_.data() + station * pixels_, pixels_};
  }
  std::span<double> row(std::size_t station) { return {values_.data() + station * pixels_, pixels_}; }

  friend bool operator==(const ShadowingField&, const ShadowingField&) = default;

 private:
  std::size_t stations_ = 0;
  std::size_t pixels_ = 0;
  std::vector<double> values_;
};

/// One realization of the deployment: stations, their shadowing fields and
/// the pixel grid covering the simulation disc.
struct NetworkSnapshot {
  std::vector<BaseStation> stations;
  ShadowingField shadowing;
  Grid grid;
  std::uint64_t seed = 0;
};

namespace detail {

/// Independent RNG stream for (seed, stream); streams never share state.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

inline constexpr std::uint64_t kStationStream = 1;
inline constexpr std::uint64_t kShadowingStream = 2;

}  // namespace detail

/// Independent log-normal shadowing field for every station of the snapshot:
/// a unit Gaussian field with exponential correlation, scaled to sigma dB and
/// exponentiated (median one, E[10 log10 S] = 0).
inline ShadowingField sample_shadowing(const NetworkSnapshot& snapshot, const GeometryConfig& config,
                                       std::uint64_t seed) {
  const Grid& grid = snapshot.grid;
  const std::size_t stations = snapshot.stations.size();
  ShadowingField field(stations, grid.pixel_count(), 1.0);
  if (config.shadow_sigma_db == 0.0 || stations == 0) return field;

  auto rng = detail::make_rng(seed, detail::kShadowingStream);
  GaussianFieldSampler sampler(grid.side(), grid.step_km(), config.shadow_corr_km);
  const auto raster_size = static_cast<std::size_t>(grid.side()) * static_cast<std::size_t>(grid.side());
  std::vector<double> first(raster_size);
  std::vector<double> second(raster_size);
  const double ln10_over_10 = std::numbers::ln10 / 10.0;

  auto fill_row = [&](std::size_t station, const std::vector<double>& raster) {
    auto row = field.row(station);
    for (std::size_t p = 0; p < row.size(); ++p) {
      row[p] = std::exp(config.shadow_sigma_db * ln10_over_10 * raster[grid.raster_index(p)]);
    }
  };
  for (std::size_t n = 0; n < stations; n += 2) {
    sampler.sample_pair(rng, first, second);
    fill_row(n, first);
    if (n + 1 < stations) fill_row(n + 1, second);
  }
  return field;
}

/// Snapshot with caller-chosen stations and unit shadowing (no randomness).
inline NetworkSnapshot build_snapshot(const GeometryConfig& config, std::vector<BaseStation> stations) {
  NetworkSnapshot snap;
  snap.grid = Grid(config.sim_radius_km, config.grid_step_km);
  snap.stations = std::move(stations);
  snap.shadowing = ShadowingField(snap.stations.size(), snap.grid.pixel_count(), 1.0);
  return snap;
}

/// Multi-tier Poisson deployment on the simulation disc: Poisson station count
/// of mean lambda * pi * R^2, uniform positions and i.i.d. tier marks with
/// P(tier = j) = lambda_j / lambda, plus per-station shadowing fields.
inline NetworkSnapshot sample_network(const GeometryConfig& config, std::uint64_t seed) {
  config.validate();
  const double expected = config.expected_station_count();
  if (expected < 3.0) {
    throw std::invalid_argument("geometry: expected station count " + std::to_string(expected) +
                                " is below 3; enlarge the window or the intensity");
  }
  auto rng = detail::make_rng(seed, detail::kStationStream);
  std::poisson_distribution<std::int64_t> count_dist(expected);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> weights;
  for (const auto& t : config.tiers) weights.push_back(t.intensity_per_km2);
  std::discrete_distribution<std::size_t> tier_dist(weights.begin(), weights.end());

  const auto count = static_cast<std::size_t>(count_dist(rng));
  std::vector<BaseStation> stations;
  stations.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double r = config.sim_radius_km * std::sqrt(unit(rng));
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    const std::size_t tier = tier_dist(rng);
    stations.push_back(BaseStation{static_cast<std::uint32_t>(n), Point{r * std::cos(phi), r * std::sin(phi)},
                                   tier, config.tiers[tier].power_mw});
  }

  NetworkSnapshot snap = build_snapshot(config, std::move(stations));
  snap.seed = seed;
  snap.shadowing = sample_shadowing(snap, config, seed);
  return snap;
}

/// Probability that an arbitrarily chosen station belongs to tier j (0-based).
inline double tier_probability(const GeometryConfig& config, std::size_t j) {
  if (j >= config.tiers.size()) throw std::out_of_range("tier index out of range");
  return config.tiers[j].intensity_per_km2 / config.total_intensity();
}

}  // namespace hetnet
