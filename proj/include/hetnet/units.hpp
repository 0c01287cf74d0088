#pragma once

#include <cmath>
#include <limits>

namespace hetnet {

/// Sentinel for quantities that diverge (mean users of an unstable cell,
/// reciprocal rate at zero SINR, ...).
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Planar position in km.
struct Point {
  double x_km = 0.0;
  double y_km = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance_km(Point a, Point b) {
  return std::hypot(a.x_km - b.x_km, a.y_km - b.y_km);
}

inline double norm_km(Point a) { return std::hypot(a.x_km, a.y_km); }

}  // namespace hetnet
