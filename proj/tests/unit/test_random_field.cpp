#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hetnet/random_field.hpp"
#include "stats.hpp"

using hetnet::GaussianFieldSampler;

TEST(GaussianField, EmbeddingIsNonNegativeDefinite) {
  for (int side : {5, 21, 107}) {
    GaussianFieldSampler s(side, 0.05, 0.05);
    EXPECT_GE(s.embedding_side(), 2 * (side - 1));
    EXPECT_GT(s.min_eigenvalue(), -1e-10) << "side " << side;
  }
}

TEST(GaussianField, UnitVarianceAndExponentialCorrelation) {
  const int side = 21;
  const double step = 0.05, corr = 0.1;
  GaussianFieldSampler s(side, step, corr);
  std::mt19937_64 rng(3);
  std::vector<double> a(side * side), b(side * side);
  double var = 0.0, lag1 = 0.0, lag3 = 0.0, diag = 0.0;
  std::size_t n = 0, n1 = 0, n3 = 0, nd = 0;
  for (int it = 0; it < 400; ++it) {
    s.sample_pair(rng, a, b);
    for (const auto* f : {&a, &b}) {
      const auto& v = *f;
      for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
          const double x = v[i * side + j];
          var += x * x;
          ++n;
          if (j + 1 < side) {
            lag1 += x * v[i * side + j + 1];
            ++n1;
          }
          if (i + 3 < side) {
            lag3 += x * v[(i + 3) * side + j];
            ++n3;
          }
          if (i + 1 < side && j + 1 < side) {
            diag += x * v[(i + 1) * side + j + 1];
            ++nd;
          }
        }
      }
    }
  }
  EXPECT_NEAR(var / n, 1.0, 0.02);
  EXPECT_NEAR(lag1 / n1, std::exp(-step / corr), 0.02);
  EXPECT_NEAR(lag3 / n3, std::exp(-3 * step / corr), 0.02);
  EXPECT_NEAR(diag / nd, std::exp(-std::sqrt(2.0) * step / corr), 0.02);
}

TEST(GaussianField, PairIsUncorrelated) {
  const int side = 15;
  GaussianFieldSampler s(side, 0.05, 0.05);
  std::mt19937_64 rng(9);
  std::vector<double> a(side * side), b(side * side);
  double cross = 0.0;
  std::size_t n = 0;
  for (int it = 0; it < 400; ++it) {
    s.sample_pair(rng, a, b);
    for (std::size_t k = 0; k < a.size(); ++k) {
      cross += a[k] * b[k];
      ++n;
    }
  }
  EXPECT_NEAR(cross / n, 0.0, 0.02);
}

TEST(GaussianField, ZeroCorrelationIsWhiteNoise) {
  GaussianFieldSampler s(11, 0.05, 0.0);
  std::mt19937_64 rng(1);
  std::vector<double> a(121), b(121);
  double lag = 0.0, var = 0.0;
  for (int it = 0; it < 500; ++it) {
    s.sample_pair(rng, a, b);
    for (std::size_t k = 0; k + 1 < a.size(); ++k) {
      lag += a[k] * a[k + 1];
      var += a[k] * a[k];
    }
  }
  EXPECT_NEAR(lag / var, 0.0, 0.02);
}

TEST(GaussianField, RejectsBadArguments) {
  EXPECT_THROW(GaussianFieldSampler(0, 0.05, 0.05), std::invalid_argument);
  EXPECT_THROW(GaussianFieldSampler(5, 0.0, 0.05), std::invalid_argument);
  EXPECT_THROW(GaussianFieldSampler(5, 0.05, -1.0), std::invalid_argument);
  GaussianFieldSampler s(5, 0.05, 0.05);
  std::mt19937_64 rng(1);
  std::vector<double> small(4), ok(25);
  EXPECT_THROW(s.sample_pair(rng, small, ok), std::invalid_argument);
}
