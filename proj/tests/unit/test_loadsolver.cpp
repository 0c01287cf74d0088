#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hetnet/loadsolver.hpp"

using namespace hetnet;

namespace {

GeometryConfig small_config() {
  auto cfg = default_geometry();
  cfg.sim_radius_km = 1.1;
  cfg.obs_radius_km = 0.6;
  return cfg;
}

double rho_at(double rho_bar_kbps, const GeometryConfig& cfg) { return rho_bar_kbps * 1e3 * cfg.total_intensity(); }

// Load equations evaluated straight from positions, powers and shadowing,
// without the gain table or cached interference sums.
std::vector<double> brute_force_operator(const std::vector<double>& theta, const NetworkSnapshot& snap,
                                         const GeometryConfig& cfg, double rho, double eps) {
  const std::size_t n = snap.stations.size();
  std::vector<double> out(n, 0.0);
  const ShannonRayleighRate rate;
  for (std::size_t p = 0; p < snap.grid.pixel_count(); ++p) {
    std::vector<double> received(n);
    std::size_t best = 0;
    for (std::size_t k = 0; k < n; ++k) {
      received[k] = 1.0 / propagation_loss(snap, k, p, cfg).value;
      if (received[k] > received[best]) best = k;
    }
    double interference = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != best) interference += (std::min(theta[k], 1.0) * (1 - eps) + eps) * received[k];
    }
    const double s = received[best] / (cfg.noise_mw + interference);
    const double r = RateParams{}.efficiency * RateParams{}.bandwidth_hz * rayleigh_spectral_efficiency(s);
    out[best] += rho * snap.grid.pixel_area_km2() / r;
  }
  return out;
}

}  // namespace

TEST(LoadOperator, MatchesBruteForce) {
  const auto cfg = small_config();
  const auto snap = sample_network(cfg, 17);
  const GainTable gains(snap, cfg);
  const auto cells = assign_cells(gains);
  const double rho = rho_at(500.0, cfg);
  const ShannonRayleighRate rate;
  std::vector<double> theta(snap.stations.size());
  for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = 0.15 * static_cast<double>(k % 9);
  const auto fast = load_operator(theta, gains, cells, rho, rate, 0.1);
  const auto slow = brute_force_operator(theta, snap, cfg, rho, 0.1);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (slow[k] == 0.0) {
      EXPECT_EQ(fast[k], 0.0);
    } else {
      EXPECT_NEAR(fast[k] / slow[k], 1.0, 1e-12) << "station " << k;
    }
  }
}

TEST(LoadOperator, MonotoneInLoads) {
  const auto cfg = small_config();
  const auto snap = sample_network(cfg, 3);
  const GainTable gains(snap, cfg);
  const auto cells = assign_cells(gains);
  const ShannonRayleighRate rate;
  const double rho = rho_at(700.0, cfg);
  std::vector<double> lo(snap.stations.size(), 0.2), hi(snap.stations.size(), 0.2);
  for (std::size_t k = 0; k < hi.size(); k += 3) hi[k] = 0.8;
  const auto a = load_operator(lo, gains, cells, rho, rate, 0.1);
  const auto b = load_operator(hi, gains, cells, rho, rate, 0.1);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_LE(a[k], b[k] * (1 + 1e-12));
  // Linear in rho.
  const auto c = load_operator(lo, gains, cells, 2 * rho, rate, 0.1);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(c[k], 2 * a[k], 1e-12 * std::max(1.0, c[k]));
}

TEST(FixedPoint, ConvergesWithSoundReport) {
  const auto cfg = small_config();
  const auto snap = sample_network(cfg, 5);
  const GainTable gains(snap, cfg);
  const auto cells = assign_cells(gains);
  const ShannonRayleighRate rate;
  const double rho = rho_at(400.0, cfg);
  const auto sol = solve_fixed_point(gains, cells, rho, rate, 0.1);
  const auto& r = sol.report;
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(r.lower_nondecreasing);
  EXPECT_TRUE(r.upper_clamped_nonincreasing);
  EXPECT_TRUE(r.ordered);
  EXPECT_FALSE(r.non_unique);
  EXPECT_LE(r.uniqueness_gap, 10 * 1e-4);
  EXPECT_EQ(static_cast<std::size_t>(r.iterations), r.history.size());
  EXPECT_EQ(sol.loads, r.lower_solution);
  // The residual of a converged contraction is below tol.
  EXPECT_LT(r.sup_norm_residual, 1e-4);
  const auto image = load_operator(sol.loads, gains, cells, rho, rate, 0.1);
  for (std::size_t k = 0; k < image.size(); ++k) EXPECT_NEAR(image[k], sol.loads[k], 1e-4);
}

TEST(FixedPoint, ZeroTrafficGivesZeroLoads) {
  const auto cfg = small_config();
  const auto snap = sample_network(cfg, 6);
  const GainTable gains(snap, cfg);
  const auto cells = assign_cells(gains);
  const auto sol = solve_fixed_point(gains, cells, 0.0, ShannonRayleighRate{}, 0.1);
  EXPECT_TRUE(sol.report.converged);
  for (double v : sol.loads) EXPECT_EQ(v, 0.0);
  for (double v : sol.report.upper_solution) EXPECT_EQ(v, 0.0);
}

TEST(FixedPoint, IterationBudgetIsReported) {
  const auto cfg = small_config();
  const auto snap = sample_network(cfg, 7);
  const GainTable gains(snap, cfg);
  const auto cells = assign_cells(gains);
  SolverOptions opt;
  opt.max_iter = 1;
  const auto sol = solve_fixed_point(gains, cells, rho_at(600.0, cfg), ShannonRayleighRate{}, 0.1, opt);
  EXPECT_FALSE(sol.report.converged);
  EXPECT_EQ(sol.report.iterations, 1);
  EXPECT_GT(sol.report.sup_norm_residual, opt.tol);
}

TEST(FixedPoint, RelaxationReachesSameSolution) {
  const auto cfg = small_config();
  const auto snap = sample_network(cfg, 8);
  const GainTable gains(snap, cfg);
  const auto cells = assign_cells(gains);
  const double rho = rho_at(300.0, cfg);
  SolverOptions tight;
  tight.tol = 1e-9;
  tight.max_iter = 2000;
  const auto plain = solve_fixed_point(gains, cells, rho, ShannonRayleighRate{}, 0.1, tight);
  tight.relaxation = 0.6;
  const auto damped = solve_fixed_point(gains, cells, rho, ShannonRayleighRate{}, 0.1, tight);
  ASSERT_TRUE(plain.report.converged);
  ASSERT_TRUE(damped.report.converged);
  EXPECT_GE(damped.report.iterations, plain.report.iterations);
  for (std::size_t k = 0; k < plain.loads.size(); ++k) EXPECT_NEAR(plain.loads[k], damped.loads[k], 1e-7);
}

TEST(FixedPoint, GateRestrictsConvergenceCheck) {
  // Station 0 serves pixel 0 and sees no interference, so its load settles
  // after one step. Station 1 serves pixel 1 under interference from
  // station 0 and needs one more step to react to station 0's load.
  const std::vector<double> losses{1e10, 1e30, 1e12, 1e11};
  const auto gains = GainTable::from_losses(2, 2, losses, 1e-13, 1.0);
  const CellMap cells({0, 1}, 2, 1.0);
  const double rho = 2.5e6;
  const auto full = solve_fixed_point(gains, cells, rho, ShannonRayleighRate{}, 0.1);
  SolverOptions opt;
  opt.gate = {1, 0};
  const auto gated = solve_fixed_point(gains, cells, rho, ShannonRayleighRate{}, 0.1, opt);
  EXPECT_TRUE(full.report.converged);
  EXPECT_TRUE(gated.report.converged);
  EXPECT_EQ(gated.report.iterations, 2);
  EXPECT_EQ(full.report.iterations, 3);
  EXPECT_EQ(gated.report.uniqueness_gap, std::abs(gated.report.lower_solution[0] - gated.report.upper_solution[0]));
  SolverOptions bad;
  bad.gate = {1};
  EXPECT_THROW(solve_fixed_point(gains, cells, rho, ShannonRayleighRate{}, 0.1, bad), std::invalid_argument);
}

TEST(SolverOptions, Validation) {
  SolverOptions o;
  EXPECT_NO_THROW(o.validate());
  o.tol = 0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
  o = {};
  o.max_iter = 0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
  o = {};
  o.relaxation = 1.5;
  EXPECT_THROW(o.validate(), std::invalid_argument);
  o.relaxation = 0.0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
}

TEST(LoadOperator, SizeMismatchThrows) {
  const std::vector<double> losses{1.0, 2.0};
  const auto gains = GainTable::from_losses(1, 2, losses, 1.0, 1.0);
  const CellMap cells({0}, 2, 1.0);
  const std::vector<double> theta{0.0};
  EXPECT_THROW(load_operator(theta, gains, cells, 1.0, ShannonRayleighRate{}, 0.1), std::invalid_argument);
}
