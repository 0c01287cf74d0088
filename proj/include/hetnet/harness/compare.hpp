#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hetnet/harness/csv.hpp"
#include "hetnet/harness/measurements.hpp"
#include "hetnet/propagation.hpp"

namespace hetnet::harness {

inline const std::vector<std::string>& comparison_metrics() {
  static const std::vector<std::string> names{"mean_traffic_kbps", "mean_load", "mean_users_stable",
                                              "mean_user_throughput_kbps"};
  return names;
}

/// Model curves per series, indexed by rho-bar. Reads the typical cell or the
/// mean cell table; both carry the same metric columns.
class ModelTable {
 public:
  static ModelTable read(std::istream& in, const std::string& source) {
    const auto table = CsvTable::read(in, source);
    ModelTable m;
    const auto c_x = table.column("rho_bar_kbps");
    const auto c_tier = table.column("tier");
    std::map<std::string, std::size_t> cols;
    for (const auto& name : comparison_metrics()) cols[name] = table.column(name);
    for (const auto& row : table.rows()) {
      auto& curve = m.curves_[row.fields[c_tier]];
      const double x = table.number(row, c_x);
      if (!curve.x.empty() && !(x > curve.x.back())) {
        throw DataError(source, row.line, "rho_bar_kbps must increase within each tier");
      }
      curve.x.push_back(x);
      for (const auto& [name, col] : cols) curve.y[name].push_back(table.number(row, col));
    }
    if (m.curves_.empty()) throw DataError(source, 0, "model table has no rows");
    return m;
  }

  bool has_series(const std::string& tier) const { return curves_.contains(tier); }

  std::vector<std::string> series() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : curves_) out.push_back(k);
    return out;
  }

  double min_rho_bar() const { return curves_.begin()->second.x.front(); }
  double max_rho_bar() const { return curves_.begin()->second.x.back(); }

  /// Sweep abscissa at which the model's pooled traffic per cell equals
  /// `traffic_kbps`. Simulated traffic per cell need not equal the nominal
  /// rho-bar (window edge effects), so measurements are placed by traffic.
  /// Falls back to the nominal axis when the pooled curve is absent or not
  /// increasing; empty outside the tabulated range.
  std::optional<double> rho_bar_for_traffic(double traffic_kbps) const {
    const auto it = curves_.find("all");
    if (it == curves_.end()) return in_range(traffic_kbps);
    const auto& x = it->second.x;
    const auto& y = it->second.y.at("mean_traffic_kbps");
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (!std::isfinite(y[k]) || (k > 0 && !(y[k] > y[k - 1]))) return in_range(traffic_kbps);
    }
    if (!(traffic_kbps >= y.front() && traffic_kbps <= y.back())) return std::nullopt;
    const auto k = static_cast<std::size_t>(std::lower_bound(y.begin(), y.end(), traffic_kbps) - y.begin());
    if (y[k] == traffic_kbps) return x[k];
    const double t = (traffic_kbps - y[k - 1]) / (y[k] - y[k - 1]);
    return x[k - 1] + t * (x[k] - x[k - 1]);
  }

  /// Linear interpolation in rho-bar; empty outside the tabulated range.
  std::optional<double> at(const std::string& tier, const std::string& metric, double rho_bar_kbps) const {
    const auto& c = curves_.at(tier);
    const auto& y = c.y.at(metric);
    if (!(rho_bar_kbps >= c.x.front() && rho_bar_kbps <= c.x.back())) return std::nullopt;
    const auto hi = std::lower_bound(c.x.begin(), c.x.end(), rho_bar_kbps);
    const auto k = static_cast<std::size_t>(hi - c.x.begin());
    if (c.x[k] == rho_bar_kbps) return y[k];
    const double t = (rho_bar_kbps - c.x[k - 1]) / (c.x[k] - c.x[k - 1]);
    return y[k - 1] + t * (y[k] - y[k - 1]);
  }

 private:
  struct Curve {
    std::vector<double> x;
    std::map<std::string, std::vector<double>> y;
  };

  std::optional<double> in_range(double x) const {
    if (!(x >= min_rho_bar() && x <= max_rho_bar())) return std::nullopt;
    return x;
  }

  std::map<std::string, Curve> curves_;
};

enum class ResidualStatus { ok, extrapolation, missing_measurement, model_undefined };

inline const char* to_string(ResidualStatus s) {
  switch (s) {
    case ResidualStatus::ok: return "ok";
    case ResidualStatus::extrapolation: return "extrapolation";
    case ResidualStatus::missing_measurement: return "missing_measurement";
    case ResidualStatus::model_undefined: return "model_undefined";
  }
  return "?";
}

struct Residual {
  int hour = 0;
  std::string tier;
  std::string metric;
  double rho_bar_kbps = 0.0;  // sweep abscissa matched to the pooled hourly traffic
  double measured = std::numeric_limits<double>::quiet_NaN();
  double model = std::numeric_limits<double>::quiet_NaN();
  double absolute = std::numeric_limits<double>::quiet_NaN();  // measured - model
  double relative = std::numeric_limits<double>::quiet_NaN();  // (measured - model) / model
  ResidualStatus status = ResidualStatus::ok;
};

struct ResidualSummary {
  std::string tier;
  std::string metric;
  std::size_t compared = 0;
  std::size_t extrapolated = 0;
  double median_abs_relative = std::numeric_limits<double>::quiet_NaN();
  double max_abs_relative = std::numeric_limits<double>::quiet_NaN();
};

struct Comparison {
  std::vector<Residual> residuals;
  std::vector<ResidualSummary> summary;
  std::size_t extrapolated() const {
    return static_cast<std::size_t>(std::count_if(residuals.begin(), residuals.end(), [](const auto& r) {
      return r.status == ResidualStatus::extrapolation;
    }));
  }
};

/// Residuals of hourly measurements against the model. Each hour is placed
/// on the model's sweep axis where the model's pooled traffic per cell
/// matches the hour's; points outside the tabulated range are flagged and
/// not extrapolated.
/// How measured load relates to the model's theta.
struct CompareOptions {
  /// Measured load counts pilot transmissions: compare against
  /// min(theta, 1)(1 - eps) + eps instead of theta.
  bool load_includes_pilot = false;
  double pilot_eps = 0.1;
};

inline Comparison compare(const std::vector<HourlySeries>& hourly, const ModelTable& model,
                          const CompareOptions& options = {}) {
  Comparison out;
  std::map<int, std::optional<double>> x_of_hour;
  for (const auto& h : hourly) {
    if (h.tier == "all") x_of_hour[h.hour] = model.rho_bar_for_traffic(h.traffic_kbps);
  }
  for (const auto& h : hourly) {
    if (!model.has_series(h.tier)) {
      throw DataError("compare", 0, "model has no series '" + h.tier + "'");
    }
    const auto x = x_of_hour.at(h.hour);
    for (const auto& metric : comparison_metrics()) {
      // The pooled traffic is the abscissa itself.
      if (h.tier == "all" && metric == "mean_traffic_kbps") continue;
      Residual r;
      r.hour = h.hour;
      r.tier = h.tier;
      r.metric = metric;
      r.rho_bar_kbps = x.value_or(std::numeric_limits<double>::quiet_NaN());
      r.measured = metric == "mean_traffic_kbps"   ? h.traffic_kbps
                   : metric == "mean_load"         ? h.load
                   : metric == "mean_users_stable" ? h.users
                                                   : h.throughput_kbps;
      auto m = x ? model.at(h.tier, metric, *x) : std::nullopt;
      if (m && metric == "mean_load" && options.load_includes_pilot) {
        m = interference_weight(*m, options.pilot_eps);
      }
      if (!m) {
        r.status = ResidualStatus::extrapolation;
      } else if (!std::isfinite(*m) || *m == 0.0) {
        r.model = *m;
        r.status = ResidualStatus::model_undefined;
      } else if (!std::isfinite(r.measured)) {
        r.model = *m;
        r.status = ResidualStatus::missing_measurement;
      } else {
        r.model = *m;
        r.absolute = r.measured - r.model;
        r.relative = r.absolute / r.model;
      }
      out.residuals.push_back(r);
    }
  }

  std::map<std::pair<std::string, std::string>, std::vector<const Residual*>> groups;
  for (const auto& r : out.residuals) groups[{r.tier, r.metric}].push_back(&r);
  for (const auto& [key, rs] : groups) {
    ResidualSummary s;
    s.tier = key.first;
    s.metric = key.second;
    std::vector<double> rel;
    for (const auto* r : rs) {
      if (r->status == ResidualStatus::extrapolation) ++s.extrapolated;
      if (r->status == ResidualStatus::ok) rel.push_back(std::abs(r->relative));
    }
    s.compared = rel.size();
    if (!rel.empty()) {
      std::sort(rel.begin(), rel.end());
      const std::size_t n = rel.size();
      s.median_abs_relative = n % 2 == 1 ? rel[n / 2] : 0.5 * (rel[n / 2 - 1] + rel[n / 2]);
      s.max_abs_relative = rel.back();
    }
    out.summary.push_back(s);
  }
  return out;
}

inline void write_residuals_csv(std::ostream& out, const Comparison& c) {
  out << "hour,tier,metric,rho_bar_kbps,measured,model,abs_residual,rel_residual,status\n";
  for (const auto& r : c.residuals) {
    out << r.hour << ',' << r.tier << ',' << r.metric << ',';
    for (double v : {r.rho_bar_kbps, r.measured, r.model, r.absolute, r.relative}) {
      put_number(out, v);
      out << ',';
    }
    out << to_string(r.status) << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const Comparison& c) {
  out << "tier,metric,compared,extrapolated,median_abs_rel,max_abs_rel\n";
  for (const auto& s : c.summary) {
    out << s.tier << ',' << s.metric << ',' << s.compared << ',' << s.extrapolated << ',';
    put_number(out, s.median_abs_relative);
    out << ',';
    put_number(out, s.max_abs_relative);
    out << '\n';
  }
}

}  // namespace hetnet::harness
