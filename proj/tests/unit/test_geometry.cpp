#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "hetnet/geometry.hpp"
#include "stats.hpp"

using namespace hetnet;

TEST(Units, DbmRoundTrip) {
  EXPECT_DOUBLE_EQ(dbm_to_mw(0.0), 1.0);
  EXPECT_NEAR(dbm_to_mw(30.0), 1000.0, 1e-9);
  EXPECT_NEAR(mw_to_dbm(dbm_to_mw(58.26)), 58.26, 1e-12);
  EXPECT_NEAR(db_to_linear(-10.84), 0.0824138, 1e-6);
}

TEST(Config, DefaultsAreValid) {
  const auto cfg = default_geometry();
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_NEAR(cfg.total_intensity(), 4.62, 1e-12);
  EXPECT_NEAR(cfg.tiers[1].intensity_per_km2 / cfg.tiers[0].intensity_per_km2, 0.039, 1e-12);
  EXPECT_NEAR(cfg.expected_station_count(), 4.62 * std::numbers::pi * 2.63 * 2.63, 1e-9);
}

TEST(Config, RejectsBadValues) {
  auto bad = [](auto mutate) {
    auto cfg = default_geometry();
    mutate(cfg);
    return cfg;
  };
  EXPECT_THROW(bad([](auto& c) { c.tiers.clear(); }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.tiers[0].intensity_per_km2 = -1; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.tiers[0].power_mw = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.obs_radius_km = 3.0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.pathloss_beta = 2.0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.grid_step_km = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.shadow_sigma_db = -1; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) {
                 c.tiers[0].intensity_per_km2 = 0;
                 c.tiers[1].intensity_per_km2 = 0;
               }).validate(),
               std::invalid_argument);
  // One empty tier is fine as long as the network is not empty.
  EXPECT_NO_THROW(bad([](auto& c) { c.tiers[1].intensity_per_km2 = 0; }).validate());
}

TEST(Grid, PixelsAreInsideDiscAndPartitionArea) {
  const Grid g(1.0, 0.1);
  EXPECT_EQ(g.side(), 21);
  std::size_t inside = 0;
  for (int i = -10; i <= 10; ++i) {
    for (int j = -10; j <= 10; ++j) {
      if (std::hypot(i * 0.1, j * 0.1) <= 1.0 + 1e-12) ++inside;
    }
  }
  EXPECT_EQ(g.pixel_count(), inside);
  EXPECT_DOUBLE_EQ(g.gridded_area_km2(), static_cast<double>(inside) * 0.01);
  for (std::size_t p = 0; p < g.pixel_count(); ++p) EXPECT_LE(norm_km(g.center(p)), 1.0 + 1e-12);
  EXPECT_NEAR(g.gridded_area_km2(), std::numbers::pi, 0.1);
}

TEST(Grid, LookupAndNeighbours) {
  const Grid g(0.5, 0.1);
  const auto origin = g.pixel_at({0.0, 0.0});
  ASSERT_TRUE(origin.has_value());
  EXPECT_DOUBLE_EQ(g.center(*origin).x_km, 0.0);
  EXPECT_EQ(g.neighbours(*origin).size(), 4u);
  EXPECT_FALSE(g.pixel_at({0.5, 0.5}).has_value());
  const auto edge = g.pixel_at({0.5, 0.0});
  ASSERT_TRUE(edge.has_value());
  EXPECT_EQ(g.neighbours(*edge).size(), 1u);  // (0.5, +-0.1) fall outside the disc
  EXPECT_EQ(g.pixel_at({0.04, -0.06}), g.pixel_at({0.0, -0.1}));
}

TEST(Sampling, DeterministicForSeed) {
  const auto cfg = default_geometry();
  const auto a = sample_network(cfg, 42);
  const auto b = sample_network(cfg, 42);
  const auto c = sample_network(cfg, 43);
  ASSERT_EQ(a.stations.size(), b.stations.size());
  for (std::size_t k = 0; k < a.stations.size(); ++k) {
    EXPECT_EQ(a.stations[k].position.x_km, b.stations[k].position.x_km);
    EXPECT_EQ(a.stations[k].tier, b.stations[k].tier);
  }
  for (std::size_t k = 0; k < a.stations.size(); k += 7) {
    for (std::size_t p = 0; p < a.grid.pixel_count(); p += 97) EXPECT_EQ(a.shadowing.at(k, p), b.shadowing.at(k, p));
  }
  EXPECT_FALSE(a.stations.size() == c.stations.size() &&
               a.stations.front().position.x_km == c.stations.front().position.x_km);
}

TEST(Sampling, CountsAndTierMarksFollowIntensities) {
  auto cfg = default_geometry();
  cfg.shadow_sigma_db = 0.0;  // positions only
  cfg.sim_radius_km = 1.5;
  cfg.obs_radius_km = 1.0;
  const double expected = cfg.expected_station_count();
  std::vector<double> counts;
  double micro = 0.0, total = 0.0, inside_half = 0.0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const auto snap = sample_network(cfg, s);
    counts.push_back(static_cast<double>(snap.stations.size()));
    for (const auto& bs : snap.stations) {
      total += 1.0;
      micro += bs.tier == 1 ? 1.0 : 0.0;
      inside_half += norm_km(bs.position) <= 0.75 ? 1.0 : 0.0;
      EXPECT_LE(norm_km(bs.position), cfg.sim_radius_km);
    }
  }
  // Poisson: mean = variance = expected count.
  const double m = test::mean(counts);
  const double sd = test::sample_sd(counts);
  EXPECT_NEAR(m, expected, 4.0 * std::sqrt(expected / 2000.0));
  EXPECT_NEAR(sd * sd / expected, 1.0, 0.1);
  const double p = tier_probability(cfg, 1);
  EXPECT_NEAR(micro / total, p, 4.0 * std::sqrt(p * (1 - p) / total));
  // Uniform in the disc: a quarter of the stations within half the radius.
  EXPECT_NEAR(inside_half / total, 0.25, 4.0 * std::sqrt(0.25 * 0.75 / total));
}

TEST(Sampling, RejectsTinyNetworks) {
  auto cfg = default_geometry();
  cfg.sim_radius_km = 0.3;
  cfg.obs_radius_km = 0.2;
  EXPECT_THROW(sample_network(cfg, 1), std::invalid_argument);
  EXPECT_THROW(tier_probability(cfg, 2), std::out_of_range);
}

TEST(Shadowing, MarginalIsLogNormalWithConfiguredSigma) {
  auto cfg = default_geometry();
  cfg.sim_radius_km = 1.0;
  cfg.obs_radius_km = 0.5;
  // Pixel-level dB values across stations: mean 0, sd sigma.
  std::vector<double> db;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto snap = sample_network(cfg, s);
    for (std::size_t k = 0; k < snap.stations.size(); ++k) {
      for (std::size_t p = 0; p < snap.grid.pixel_count(); p += 53) db.push_back(10.0 * std::log10(snap.shadowing.at(k, p)));
    }
  }
  ASSERT_GT(db.size(), 5000u);
  EXPECT_NEAR(test::mean(db), 0.0, 0.3);
  EXPECT_NEAR(test::sample_sd(db), cfg.shadow_sigma_db, 0.3);
}

TEST(Shadowing, ZeroSigmaGivesUnitField) {
  auto cfg = default_geometry();
  cfg.shadow_sigma_db = 0.0;
  const auto snap = sample_network(cfg, 5);
  for (std::size_t k = 0; k < snap.stations.size(); ++k) {
    for (double v : snap.shadowing.row(k)) ASSERT_EQ(v, 1.0);
  }
}

TEST(Snapshot, BuildFromExplicitStations) {
  auto cfg = default_geometry();
  cfg.sim_radius_km = 0.5;
  cfg.obs_radius_km = 0.4;
  const auto snap = build_snapshot(cfg, {BaseStation{0, {0.0, 0.0}, 0, cfg.tiers[0].power_mw}});
  EXPECT_EQ(snap.stations.size(), 1u);
  EXPECT_EQ(snap.shadowing.station_count(), 1u);
  EXPECT_EQ(snap.shadowing.pixel_count(), snap.grid.pixel_count());
  EXPECT_EQ(snap.shadowing.at(0, 3), 1.0);
}
