#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hetnet/cellmodel.hpp"

using namespace hetnet;

namespace {

GeometryConfig small_config(double sigma_db = 10.0) {
  auto cfg = default_geometry();
  cfg.sim_radius_km = 1.2;
  cfg.obs_radius_km = 0.7;
  cfg.shadow_sigma_db = sigma_db;
  return cfg;
}

}  // namespace

TEST(CellMap, PartitionIsExact) {
  const auto cfg = small_config();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto snap = sample_network(cfg, seed);
    const auto cells = assign_cells(snap, cfg);
    std::size_t pixels = 0;
    double surface = 0.0;
    for (std::size_t k = 0; k < snap.stations.size(); ++k) {
      pixels += cells.pixels(k).size();
      surface += cells.surface_km2(k);
    }
    EXPECT_EQ(pixels, snap.grid.pixel_count());
    EXPECT_NEAR(surface, static_cast<double>(snap.grid.pixel_count()) * cfg.grid_step_km * cfg.grid_step_km, 1e-9);
    EXPECT_DOUBLE_EQ(cells.total_surface_km2(), snap.grid.gridded_area_km2());
  }
}

TEST(CellMap, ServerHasSmallestLoss) {
  const auto cfg = small_config();
  const auto snap = sample_network(cfg, 4);
  const auto cells = assign_cells(snap, cfg);
  for (std::size_t p = 0; p < snap.grid.pixel_count(); p += 13) {
    const double best = propagation_loss(snap, cells.server(p), p, cfg).value;
    for (std::size_t k = 0; k < snap.stations.size(); ++k) {
      EXPECT_LE(best, propagation_loss(snap, k, p, cfg).value * (1 + 1e-12));
    }
  }
}

TEST(CellMap, TiesGoToLowestIndex) {
  auto cfg = small_config(0.0);
  const double p = cfg.tiers[0].power_mw;
  // Mirror-image stations: every pixel on the x = 0 axis is a tie.
  const auto snap = build_snapshot(cfg, {BaseStation{0, {-0.3, 0.0}, 0, p}, BaseStation{1, {0.3, 0.0}, 0, p}});
  const auto cells = assign_cells(snap, cfg);
  std::size_t ties = 0;
  for (std::size_t px = 0; px < snap.grid.pixel_count(); ++px) {
    const auto c = snap.grid.center(px);
    if (std::abs(c.x_km) < 1e-12) {
      ++ties;
      EXPECT_EQ(cells.server(px), 0u);
    } else {
      EXPECT_EQ(cells.server(px), c.x_km < 0 ? 0u : 1u);
    }
  }
  EXPECT_GT(ties, 10u);
}

TEST(CellMap, RaisingPowerNeverShrinksCell) {
  const auto cfg = small_config();
  auto snap = sample_network(cfg, 8);
  const auto before = assign_cells(snap, cfg);
  for (std::size_t k : {std::size_t{0}, snap.stations.size() / 2}) {
    auto boosted = snap;
    boosted.stations[k].power_mw *= 4.0;
    const auto after = assign_cells(boosted, cfg);
    const auto& old_pixels = before.pixels(k);
    const std::set<std::size_t> new_pixels(after.pixels(k).begin(), after.pixels(k).end());
    for (auto px : old_pixels) EXPECT_TRUE(new_pixels.contains(px));
    EXPECT_GE(new_pixels.size(), old_pixels.size());
  }
}

TEST(CellMap, FullyShadowedStationHasEmptyCell) {
  auto cfg = small_config(0.0);
  const double p = cfg.tiers[0].power_mw;
  auto snap = build_snapshot(cfg, {BaseStation{0, {0.0, 0.0}, 0, p}, BaseStation{1, {0.2, 0.0}, 0, p},
                                   BaseStation{2, {-0.4, 0.4}, 1, cfg.tiers[1].power_mw}});
  for (double& v : snap.shadowing.row(1)) v = 1e-9;  // 90 dB of extra loss everywhere
  const auto cells = assign_cells(snap, cfg);
  EXPECT_TRUE(cells.pixels(1).empty());
  EXPECT_EQ(cells.surface_km2(1), 0.0);
  EXPECT_EQ(traffic_demand(cells, 1, 1e6), 0.0);
  EXPECT_GT(cells.surface_km2(0), 0.0);
  EXPECT_GT(cells.surface_km2(2), 0.0);
}

TEST(CellMap, SingleStationServesEverything) {
  auto cfg = small_config(0.0);
  const auto snap = build_snapshot(cfg, {BaseStation{0, {0.3, -0.2}, 1, cfg.tiers[1].power_mw}});
  const auto cells = assign_cells(snap, cfg);
  EXPECT_EQ(cells.pixels(0).size(), snap.grid.pixel_count());
}

TEST(CellMap, ShadowingPocketDisconnectsCell) {
  auto cfg = small_config(0.0);
  const double p = cfg.tiers[0].power_mw;
  auto snap = build_snapshot(cfg, {BaseStation{0, {-0.5, 0.0}, 0, p}, BaseStation{1, {0.5, 0.0}, 0, p}});
  // 30 dB of gain for station 0 on a small patch deep inside station 1's half.
  for (std::size_t px = 0; px < snap.grid.pixel_count(); ++px) {
    const auto c = snap.grid.center(px);
    if (std::hypot(c.x_km - 0.7, c.y_km - 0.5) < 0.08) snap.shadowing.row(0)[px] = 1e3;
  }
  const auto cells = assign_cells(snap, cfg);
  // Count connected components of station 0's pixels on the 4-neighbour grid.
  std::vector<char> mine(snap.grid.pixel_count(), 0), seen(snap.grid.pixel_count(), 0);
  for (auto px : cells.pixels(0)) mine[px] = 1;
  int components = 0;
  for (auto start : cells.pixels(0)) {
    if (seen[start]) continue;
    ++components;
    std::queue<std::size_t> q;
    q.push(start);
    seen[start] = 1;
    while (!q.empty()) {
      const auto px = q.front();
      q.pop();
      for (auto n : snap.grid.neighbours(px)) {
        if (mine[n] && !seen[n]) {
          seen[n] = 1;
          q.push(n);
        }
      }
    }
  }
  EXPECT_EQ(components, 2);
}

TEST(TrafficDemand, SurfaceTimesDensity) {
  // A cell of 0.2165 km^2 (about 1/lambda) at rho-bar = 600 kbps.
  const double lambda = 4.62;
  const double rho = 600e3 * lambda;
  const std::size_t pixels = 866;  // 866 * 0.00025 = 0.2165 km^2
  std::vector<std::uint32_t> server(pixels, 0);
  const CellMap cells(server, 1, 0.00025);
  EXPECT_NEAR(cells.surface_km2(0), 0.2165, 1e-12);
  EXPECT_NEAR(traffic_demand(cells, 0, rho), 0.2165 * rho, 1e-6);
  EXPECT_NEAR(traffic_demand(cells, 0, rho) / 1e3, 600.0, 0.2);
  EXPECT_EQ(traffic_demand(cells, 0, 0.0), 0.0);
  EXPECT_THROW(traffic_demand(cells, 1, rho), std::out_of_range);
}

TEST(TrafficDemand, SumsToWindowTraffic) {
  const auto cfg = small_config();
  const auto snap = sample_network(cfg, 2);
  const auto cells = assign_cells(snap, cfg);
  const double rho = 1.7e6;
  double sum = 0.0;
  for (std::size_t k = 0; k < snap.stations.size(); ++k) sum += traffic_demand(cells, k, rho);
  EXPECT_NEAR(sum, rho * snap.grid.gridded_area_km2(), 1e-6 * sum);
}

TEST(CellMap, RejectsBadServer) {
  EXPECT_THROW(CellMap({0, 3}, 2, 1.0), std::invalid_argument);
}

TEST(CsvExport, HeadersAndRows) {
  auto cfg = small_config(0.0);
  const auto snap = build_snapshot(cfg, {BaseStation{7, {0.0, 0.0}, 1, cfg.tiers[1].power_mw}});
  const auto cells = assign_cells(snap, cfg);
  std::ostringstream map, table;
  write_pixel_map_csv(map, snap, cells);
  write_cell_table_csv(table, snap, cells, 2e6);
  std::istringstream m(map.str()), t(table.str());
  std::string line;
  std::getline(m, line);
  EXPECT_EQ(line, "pixel_x_km,pixel_y_km,serving_id");
  std::getline(m, line);
  EXPECT_EQ(line.substr(line.rfind(',') + 1), "7");
  std::getline(t, line);
  EXPECT_EQ(line, "id,tier,surface_km2,traffic_demand_bps");
  std::getline(t, line);
  EXPECT_EQ(line.substr(0, 4), "7,2,");
  std::ostringstream st;
  write_station_csv(st, snap);
  EXPECT_EQ(st.str(), "id,x_km,y_km,tier,power_dbm\n7,0,0,2,47.42\n");
}
