#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace hetnet {

/// Stationary zero-mean, unit-variance Gaussian random field on a square
/// raster with isotropic exponential correlation exp(-d / corr_km).
///
/// Sampling uses circulant embedding: the covariance is laid out on a torus of
/// side m >= 2 * (side - 1) (smallest 5-smooth size), whose 2-D DFT gives the eigenvalues of the
/// embedding matrix. One complex synthesis yields two independent fields.
/// Each instance owns its FFT twiddle cache, so use one sampler per thread.
class GaussianFieldSampler {
 public:
  GaussianFieldSampler(int side, double step_km, double corr_km)
      : side_(side) {
    if (side < 1) throw std::invalid_argument("field side must be >= 1");
    if (!(step_km > 0.0)) throw std::invalid_argument("field step must be > 0");
    if (corr_km < 0.0) throw std::invalid_argument("correlation distance must be >= 0");
    // Correlation at one pixel spacing below double precision: white noise.
    independent_ = corr_km == 0.0 || step_km / corr_km > 700.0;
    if (independent_) return;

    m_ = std::max(2, 2 * (side_ - 1));
    while (!smooth(m_)) ++m_;
    const auto m = static_cast<std::size_t>(m_);
    std::vector<std::complex<double>> cov(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      const double di = static_cast<double>(std::min(i, m - i));
      for (std::size_t j = 0; j < m; ++j) {
        const double dj = static_cast<double>(std::min(j, m - j));
        cov[i * m + j] = std::exp(-step_km * std::hypot(di, dj) / corr_km);
      }
    }
    fft2(cov, m);
    sqrt_eigen_.resize(m * m);
    const double scale = 1.0 / static_cast<double>(m * m);
    min_eigenvalue_ = cov[0].real();
    for (std::size_t k = 0; k < m * m; ++k) {
      const double ev = cov[k].real();
      min_eigenvalue_ = std::min(min_eigenvalue_, ev);
      // Negative eigenvalues are round-off level for this kernel; clip them.
      sqrt_eigen_[k] = std::sqrt(std::max(ev, 0.0) * scale);
    }
  }

  int side() const { return side_; }
  int embedding_side() const { return m_; }

  /// Smallest eigenvalue of the embedding before clipping (diagnostic).
  double min_eigenvalue() const { return min_eigenvalue_; }

  /// Fills two independent fields, each side*side in row-major order.
  template <class Rng>
  void sample_pair(Rng& rng, std::span<double> first, std::span<double> second) {
    const auto n = static_cast<std::size_t>(side_);
    if (first.size() != n * n || second.size() != n * n) {
      throw std::invalid_argument("field buffers must hold side*side values");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    if (independent_) {
      for (auto& v : first) v = normal(rng);
      for (auto& v : second) v = normal(rng);
      return;
    }
    const auto m = static_cast<std::size_t>(m_);
    work_.resize(m * m);
    for (std::size_t k = 0; k < m * m; ++k) {
      const double re = normal(rng);
      const double im = normal(rng);
      work_[k] = sqrt_eigen_[k] * std::complex<double>(re, im);
    }
    fft2(work_, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        first[i * n + j] = work_[i * m + j].real();
        second[i * n + j] = work_[i * m + j].imag();
      }
    }
  }

 private:
  // Sizes with only 2, 3, 5 factors keep the mixed-radix FFT fast.
  static bool smooth(int v) {
    for (int f : {2, 3, 5}) {
      while (v % f == 0) v /= f;
    }
    return v == 1;
  }

  // Columns first, then only the leading `rows` rows: the samples only read
  // the top-left side x side block.
  void fft2(std::vector<std::complex<double>>& data, std::size_t rows) {
    const auto m = static_cast<std::size_t>(m_);
    line_in_.resize(m);
    line_out_.resize(m);
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t r = 0; r < m; ++r) line_in_[r] = data[r * m + c];
      fft_.fwd(line_out_, line_in_);
      for (std::size_t r = 0; r < m; ++r) data[r * m + c] = line_out_[r];
    }
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(r * m), m, line_in_.begin());
      fft_.fwd(line_out_, line_in_);
      std::copy_n(line_out_.begin(), m, data.begin() + static_cast<std::ptrdiff_t>(r * m));
    }
  }

  int side_ = 0;
  int m_ = 0;
  bool independent_ = false;
  double min_eigenvalue_ = 1.0;
  std::vector<double> sqrt_eigen_;
  std::vector<std::complex<double>> work_;
  std::vector<std::complex<double>> line_in_;
  std::vector<std::complex<double>> line_out_;
  Eigen::FFT<double> fft_;
};

}  // namespace hetnet
