#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hetnet/geometry.hpp"
#include "hetnet/propagation.hpp"

namespace hetnet {

/// Partition of the grid into service zones: each pixel is served by the
/// station with the smallest propagation loss.
class CellMap {
 public:
  CellMap() = default;

  CellMap(std::vector<std::uint32_t> server_of_pixel, std::size_t stations, double pixel_area_km2)
      : server_(std::move(server_of_pixel)), pixels_of_(stations), pixel_area_km2_(pixel_area_km2) {
    for (std::size_t p = 0; p < server_.size(); ++p) {
      if (server_[p] >= stations) throw std::invalid_argument("cell map: server index out of range");
      pixels_of_[server_[p]].push_back(p);
    }
  }

  std::size_t pixel_count() const { return server_.size(); }
  std::size_t station_count() const { return pixels_of_.size(); }
  double pixel_area_km2() const { return pixel_area_km2_; }

  std::uint32_t server(std::size_t pixel) const { return server_[pixel]; }
  std::span<const std::uint32_t> servers() const { return server_; }
  const std::vector<std::size_t>& pixels(std::size_t station) const { return pixels_of_[station]; }

  /// |V(X)| in km^2 (pixel count times pixel area).
  double surface_km2(std::size_t station) const {
    return static_cast<double>(pixels_of_[station].size()) * pixel_area_km2_;
  }

  double total_surface_km2() const { return static_cast<double>(server_.size()) * pixel_area_km2_; }

 private:
  std::vector<std::uint32_t> server_;
  std::vector<std::vector<std::size_t>> pixels_of_;
  double pixel_area_km2_ = 0.0;
};

/// Strongest-received-power association. Ties go to the lowest station index.
inline CellMap assign_cells(const GainTable& gains) {
  if (gains.station_count() == 0) throw std::invalid_argument("assign_cells: snapshot has no stations");
  std::vector<std::uint32_t> server(gains.pixel_count());
  for (std::size_t p = 0; p < gains.pixel_count(); ++p) {
    const auto row = gains.pixel_row(p);
    std::size_t best = 0;
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (row[k] > row[best]) best = k;
    }
    server[p] = static_cast<std::uint32_t>(best);
  }
  return CellMap(std::move(server), gains.station_count(), gains.pixel_area_km2());
}

inline CellMap assign_cells(const NetworkSnapshot& snapshot, const GeometryConfig& config) {
  return assign_cells(GainTable(snapshot, config));
}

/// rho(X) = rho |V(X)| in bit/s, with rho in bit/s/km^2.
inline double traffic_demand(const CellMap& cells, std::size_t station, double rho_bps_per_km2) {
  if (station >= cells.station_count()) throw std::out_of_range("traffic_demand: station out of range");
  return rho_bps_per_km2 * cells.surface_km2(station);
}

/// pixel_x_km,pixel_y_km,serving_id
inline void write_pixel_map_csv(std::ostream& out, const NetworkSnapshot& snapshot, const CellMap& cells) {
  out << "pixel_x_km,pixel_y_km,serving_id\n";
  for (std::size_t p = 0; p < cells.pixel_count(); ++p) {
    const Point c = snapshot.grid.center(p);
    out << c.x_km << ',' << c.y_km << ',' << snapshot.stations[cells.server(p)].id << '\n';
  }
}

/// id,tier,surface_km2,traffic_demand_bps
inline void write_cell_table_csv(std::ostream& out, const NetworkSnapshot& snapshot, const CellMap& cells,
                                 double rho_bps_per_km2) {
  out << "id,tier,surface_km2,traffic_demand_bps\n";
  for (std::size_t k = 0; k < snapshot.stations.size(); ++k) {
    out << snapshot.stations[k].id << ',' << snapshot.stations[k].tier + 1 << ',' << cells.surface_km2(k) << ','
        << traffic_demand(cells, k, rho_bps_per_km2) << '\n';
  }
}

inline void write_station_csv(std::ostream& out, const NetworkSnapshot& snapshot) {
  out << "id,x_km,y_km,tier,power_dbm\n";
  for (const auto& bs : snapshot.stations) {
    out << bs.id << ',' << bs.position.x_km << ',' << bs.position.y_km << ',' << bs.tier + 1 << ','
        << mw_to_dbm(bs.power_mw) << '\n';
  }
}

}  // namespace hetnet
