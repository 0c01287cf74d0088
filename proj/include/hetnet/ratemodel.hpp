#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hetnet/units.hpp"

namespace hetnet {

struct RateParams {
  double bandwidth_hz = 5e6;
  double efficiency = 0.3;

  void validate() const {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("rate: bandwidth must be > 0");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw std::invalid_argument("rate: efficiency must be in (0, 1]");
  }
};

/// e^x E1(x) for x > 0, where E1 is the exponential integral.
///
/// Series below x = 1, Lentz continued fraction above (which yields the
/// scaled value directly, so no overflow for large x), and a two-term
/// expansion for x < 1e-8.
inline double scaled_exp_e1(double x) {
  constexpr double euler = std::numbers::egamma;
  if (!(x > 0.0)) return kInfinity;
  if (x < 1e-8) {
    const double lead = -euler - std::log(x);
    return lead * (1.0 + x) + x;
  }
  if (x <= 1.0) {
    double sum = 0.0;
    double term = 1.0;  // (-x)^k / k!
    for (int k = 1; k < 60; ++k) {
      term *= -x / k;
      const double add = term / k;
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return std::exp(x) * (-euler - std::log(x) - sum);
  }
  constexpr double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h;
}

/// E[log2(1 + |H|^2 s)] for unit-mean Rayleigh fading, i.e.
/// e^{1/s} E1(1/s) / ln 2.
inline double rayleigh_spectral_efficiency(double sinr) {
  if (!(sinr > 0.0)) return 0.0;
  if (std::isinf(sinr)) return kInfinity;
  return scaled_exp_e1(1.0 / sinr) / std::numbers::ln2;
}

/// Peak bit-rate (bit/s): efficiency * W * E[log2(1 + |H|^2 SINR)].
inline double peak_rate(double sinr, const RateParams& params) {
  if (sinr < 0.0) throw std::invalid_argument("peak_rate: SINR must be >= 0");
  return params.efficiency * params.bandwidth_hz * rayleigh_spectral_efficiency(sinr);
}

/// Reciprocal of the peak bit-rate (s/bit); +infinity at zero SINR.
inline double inverse_rate(double sinr, const RateParams& params) {
  const double r = peak_rate(sinr, params);
  return r > 0.0 ? 1.0 / r : kInfinity;
}

/// Any increasing map from SINR to peak bit-rate can drive the load
/// equations.
template <class R>
concept RateFunction = requires(const R& r, double s) {
  { r.peak_rate(s) } -> std::convertible_to<double>;
  { r.inverse_rate(s) } -> std::convertible_to<double>;
};

/// Closed-form Rayleigh-faded Shannon rate.
class ShannonRayleighRate {
 public:
  explicit ShannonRayleighRate(RateParams params = {}) : params_(params) { params_.validate(); }

  const RateParams& params() const { return params_; }
  double peak_rate(double sinr) const { return hetnet::peak_rate(sinr, params_); }
  double inverse_rate(double sinr) const { return hetnet::inverse_rate(sinr, params_); }

 private:
  RateParams params_;
};

/// Log-spaced lookup table over [s_min, s_max], linear in ln(s) between
/// knots; falls back to the exact rate outside the table.
template <RateFunction Exact = ShannonRayleighRate>
class TabulatedRate {
 public:
  explicit TabulatedRate(Exact exact, double s_min = 1e-6, double s_max = 1e6, std::size_t knots = 4096)
      : exact_(std::move(exact)), log_min_(std::log(s_min)), log_max_(std::log(s_max)) {
    if (!(s_min > 0.0 && s_max > s_min) || knots < 2) throw std::invalid_argument("rate table: bad range");
    step_ = (log_max_ - log_min_) / static_cast<double>(knots - 1);
    values_.resize(knots);
    for (std::size_t k = 0; k < knots; ++k) {
      values_[k] = exact_.peak_rate(std::exp(log_min_ + step_ * static_cast<double>(k)));
    }
  }

  const Exact& exact() const { return exact_; }

  double peak_rate(double sinr) const {
    if (!(sinr > 0.0)) return exact_.peak_rate(sinr);
    const double u = std::log(sinr);
    if (u < log_min_ || u >= log_max_) return exact_.peak_rate(sinr);
    const double pos = (u - log_min_) / step_;
    const auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= values_.size()) return values_.back();
    const double frac = pos - static_cast<double>(k);
    return values_[k] + frac * (values_[k + 1] - values_[k]);
  }

  double inverse_rate(double sinr) const {
    const double r = peak_rate(sinr);
    return r > 0.0 ? 1.0 / r : kInfinity;
  }

 private:
  Exact exact_;
  double log_min_;
  double log_max_;
  double step_ = 0.0;
  std::vector<double> values_;
};

/// Exact rate, or its lookup table when `use_table` is set; chosen at run
/// time from the scenario configuration.
class ConfiguredRate {
 public:
  explicit ConfiguredRate(RateParams params = {}, bool use_table = false)
      : exact_(params), table_(use_table ? std::optional<TabulatedRate<>>(TabulatedRate<>(exact_)) : std::nullopt) {}

  bool uses_table() const { return table_.has_value(); }
  const RateParams& params() const { return exact_.params(); }

  double peak_rate(double sinr) const { return table_ ? table_->peak_rate(sinr) : exact_.peak_rate(sinr); }
  double inverse_rate(double sinr) const { return table_ ? table_->inverse_rate(sinr) : exact_.inverse_rate(sinr); }

 private:
  ShannonRayleighRate exact_;
  std::optional<TabulatedRate<>> table_;
};

}  // namespace hetnet
