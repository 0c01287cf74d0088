#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "hetnet/harness/csv.hpp"

namespace hetnet::harness {

inline constexpr const char* kMeasurementHeader = "hour,tier,traffic_kbps,load,users";

/// One cell observed during one hour.
struct CellHour {
  int hour = 0;
  std::string tier;
  double traffic_kbps = 0.0;
  double load = 0.0;
  double users = 0.0;
  std::size_t line = 0;
};

/// Per-hour averages over the cells of one series ("all" or a tier name).
struct HourlySeries {
  int hour = 0;
  std::string tier;
  std::size_t cells = 0;
  double traffic_kbps = 0.0;
  double load = 0.0;
  double users = 0.0;
  /// Mean traffic over mean users; NaN when no user was observed.
  double throughput_kbps = std::numeric_limits<double>::quiet_NaN();
};

/// Validated cell-hour rows. When `tiers` is non-empty every row's tier must
/// be one of them.
inline std::vector<CellHour> read_measurements(std::istream& in, const std::string& source,
                                               const std::vector<std::string>& tiers = {}) {
  const auto table = CsvTable::read(in, source);
  const auto c_hour = table.column("hour");
  const auto c_tier = table.column("tier");
  const auto c_traffic = table.column("traffic_kbps");
  const auto c_load = table.column("load");
  const auto c_users = table.column("users");
  std::vector<CellHour> out;
  for (const auto& row : table.rows()) {
    CellHour m;
    m.line = row.line;
    const double hour = table.number(row, c_hour);
    if (!(hour >= 0.0) || hour != std::floor(hour)) {
      throw DataError(source, row.line, "hour must be a non-negative integer");
    }
    m.hour = static_cast<int>(hour);
    m.tier = row.fields[c_tier];
    if (m.tier.empty()) throw DataError(source, row.line, "empty tier");
    if (m.tier == "all") throw DataError(source, row.line, "tier 'all' is reserved for the pooled series");
    if (!tiers.empty() && std::find(tiers.begin(), tiers.end(), m.tier) == tiers.end()) {
      throw DataError(source, row.line, "unknown tier '" + m.tier + "'");
    }
    m.traffic_kbps = table.number(row, c_traffic);
    m.load = table.number(row, c_load);
    m.users = table.number(row, c_users);
    if (!(m.traffic_kbps >= 0.0) || !std::isfinite(m.traffic_kbps)) {
      throw DataError(source, row.line, "traffic_kbps must be finite and >= 0");
    }
    if (!(m.load >= 0.0 && m.load <= 1.0)) throw DataError(source, row.line, "load must be in [0, 1]");
    if (!(m.users >= 0.0) || !std::isfinite(m.users)) {
      throw DataError(source, row.line, "users must be finite and >= 0");
    }
    out.push_back(std::move(m));
  }
  if (out.empty()) throw DataError(source, 0, "no measurement rows");
  return out;
}

/// Hourly means for the pooled series and for every tier present, ordered
/// by hour then series ("all" first).
inline std::vector<HourlySeries> hourly_series(const std::vector<CellHour>& rows) {
  struct Acc {
    std::size_t n = 0;
    double traffic = 0.0, load = 0.0, users = 0.0;
  };
  std::map<int, std::map<std::string, Acc>> acc;
  for (const auto& m : rows) {
    for (const std::string& key : {std::string("all"), m.tier}) {
      auto& a = acc[m.hour][key];
      ++a.n;
      a.traffic += m.traffic_kbps;
      a.load += m.load;
      a.users += m.users;
    }
  }
  std::vector<HourlySeries> out;
  for (const auto& [hour, by_tier] : acc) {
    auto emit = [&](const std::string& key, const Acc& a) {
      HourlySeries h;
      h.hour = hour;
      h.tier = key;
      h.cells = a.n;
      const auto n = static_cast<double>(a.n);
      h.traffic_kbps = a.traffic / n;
      h.load = a.load / n;
      h.users = a.users / n;
      if (h.users > 0.0) h.throughput_kbps = h.traffic_kbps / h.users;
      out.push_back(h);
    };
    emit("all", by_tier.at("all"));
    for (const auto& [key, a] : by_tier) {
      if (key != "all") emit(key, a);
    }
  }
  return out;
}

inline void write_hourly_csv(std::ostream& out, const std::vector<HourlySeries>& series) {
  out << "hour,tier,cells,traffic_kbps,load,users,throughput_kbps\n";
  for (const auto& h : series) {
    out << h.hour << ',' << h.tier << ',' << h.cells << ',';
    put_number(out, h.traffic_kbps);
    out << ',';
    put_number(out, h.load);
    out << ',';
    put_number(out, h.users);
    out << ',';
    put_number(out, h.throughput_kbps);
    out << '\n';
  }
}

}  // namespace hetnet::harness
