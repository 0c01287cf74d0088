#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "hetnet/geometry.hpp"
#include "hetnet/loadsolver.hpp"
#include "hetnet/meancell.hpp"
#include "hetnet/ratemodel.hpp"

namespace hetnet::harness {

inline constexpr int kSchemaVersion = 1;

/// Configuration problem, with the offending line and field when known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  GeometryConfig geometry = default_geometry();
  RateParams rate;
  bool rate_table = false;
  double pilot_eps = 0.1;
  /// Mean traffic demand per cell, rho-bar = rho / lambda, in kbit/s.
  std::vector<double> rho_bar_kbps{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  int replications = 10;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  SolverOptions solver;
  MeanCellOptions mean_cell;
  std::string output_dir = "results";
  bool gnuplot = false;

  /// rho (bit/s/km^2) for a per-cell target rho-bar in kbit/s.
  double rho_bps_per_km2(double rho_bar_kbps) const { return rho_bar_kbps * 1e3 * geometry.total_intensity(); }

  void validate() const {
    try {
      geometry.validate();
      rate.validate();
      solver.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    if (!(pilot_eps >= 0.0 && pilot_eps <= 1.0)) throw ConfigError("config: traffic.pilot_eps must be in [0, 1]");
    if (rho_bar_kbps.empty()) throw ConfigError("config: traffic.rho_bar_kbps must list at least one value");
    for (double v : rho_bar_kbps) {
      if (!(v > 0.0)) throw ConfigError("config: traffic.rho_bar_kbps values must be > 0");
    }
    if (replications < 1) throw ConfigError("config: simulation.replications must be >= 1");
    if (threads < 0) throw ConfigError("config: simulation.threads must be >= 0");
    if (mean_cell.samples < 1) throw ConfigError("config: meancell.samples must be >= 1");
    if (!(mean_cell.tol > 0.0)) throw ConfigError("config: meancell.tol must be > 0");
    if (mean_cell.max_iter < 1) throw ConfigError("config: meancell.max_iter must be >= 1");
  }
};

namespace detail {

inline std::string where(const YAML::Node& node, const std::string& field) {
  std::ostringstream os;
  os << "config:";
  const auto mark = node.Mark();
  if (mark.line >= 0) os << (mark.line + 1) << ':' << (mark.column + 1) << ':';
  os << " field '" << field << "'";
  return os.str();
}

inline void reject_unknown(const YAML::Node& map, const std::string& path, const std::set<std::string>& allowed) {
  if (!map.IsMap()) throw ConfigError(where(map, path) + ": expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) {
      throw ConfigError(where(kv.first, path.empty() ? key : path + "." + key) + ": unknown key");
    }
  }
}

template <class T>
void read(const YAML::Node& map, const std::string& key, const std::string& path, T& out) {
  const auto node = map[key];
  if (!node) return;
  try {
    out = node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where(node, path + "." + key) + ": cannot convert value '" + YAML::Dump(node) + "'");
  }
}

}  // namespace detail

/// Parse a scenario from YAML text. Absent fields keep their defaults.
inline ScenarioConfig parse_scenario(const std::string& text) {
  using detail::read;
  using detail::reject_unknown;
  using detail::where;

  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("config:" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                      ": parse error: " + e.msg);
  }
  ScenarioConfig cfg;
  if (!root || root.IsNull()) throw ConfigError("config: empty document");
  reject_unknown(root, "", {"schema_version", "geometry", "rate", "traffic", "simulation", "solver", "meancell",
                            "output"});

  int version = 0;
  if (!root["schema_version"]) throw ConfigError("config: field 'schema_version' is required");
  read(root, "schema_version", "", version);
  if (version != kSchemaVersion) {
    throw ConfigError(where(root["schema_version"], "schema_version") + ": unsupported version " +
                      std::to_string(version) + " (expected " + std::to_string(kSchemaVersion) + ")");
  }

  if (const auto g = root["geometry"]) {
    reject_unknown(g, "geometry", {"sim_radius_km", "obs_radius_km", "grid_step_km", "pathloss_k_per_km",
                                   "pathloss_beta", "shadow_sigma_db", "shadow_corr_km", "noise_dbm", "tiers"});
    auto& geo = cfg.geometry;
    read(g, "sim_radius_km", "geometry", geo.sim_radius_km);
    geo.obs_radius_km = geo.sim_radius_km - 0.5;
    read(g, "obs_radius_km", "geometry", geo.obs_radius_km);
    read(g, "grid_step_km", "geometry", geo.grid_step_km);
    read(g, "pathloss_k_per_km", "geometry", geo.pathloss_k_per_km);
    read(g, "pathloss_beta", "geometry", geo.pathloss_beta);
    read(g, "shadow_sigma_db", "geometry", geo.shadow_sigma_db);
    read(g, "shadow_corr_km", "geometry", geo.shadow_corr_km);
    double noise_dbm = mw_to_dbm(geo.noise_mw);
    read(g, "noise_dbm", "geometry", noise_dbm);
    geo.noise_mw = dbm_to_mw(noise_dbm);
    if (const auto tiers = g["tiers"]) {
      if (!tiers.IsSequence() || tiers.size() == 0) {
        throw ConfigError(where(tiers, "geometry.tiers") + ": expected a non-empty list");
      }
      geo.tiers.clear();
      for (std::size_t j = 0; j < tiers.size(); ++j) {
        const auto t = tiers[j];
        const std::string path = "geometry.tiers[" + std::to_string(j) + "]";
        reject_unknown(t, path, {"name", "intensity_per_km2", "power_dbm"});
        for (const char* required : {"name", "intensity_per_km2", "power_dbm"}) {
          if (!t[required]) throw ConfigError(where(t, path + "." + required) + ": required");
        }
        TierConfig tier;
        double power_dbm = 0.0;
        read(t, "name", path, tier.name);
        read(t, "intensity_per_km2", path, tier.intensity_per_km2);
        read(t, "power_dbm", path, power_dbm);
        tier.power_mw = dbm_to_mw(power_dbm);
        for (const auto& other : geo.tiers) {
          if (other.name == tier.name) throw ConfigError(where(t, path + ".name") + ": duplicate tier name");
        }
        if (tier.name == "all") throw ConfigError(where(t, path + ".name") + ": 'all' is reserved");
        geo.tiers.push_back(tier);
      }
    }
  }

  if (const auto r = root["rate"]) {
    reject_unknown(r, "rate", {"bandwidth_hz", "efficiency", "lookup_table"});
    read(r, "bandwidth_hz", "rate", cfg.rate.bandwidth_hz);
    read(r, "efficiency", "rate", cfg.rate.efficiency);
    read(r, "lookup_table", "rate", cfg.rate_table);
  }

  if (const auto t = root["traffic"]) {
    reject_unknown(t, "traffic", {"pilot_eps", "rho_bar_kbps"});
    read(t, "pilot_eps", "traffic", cfg.pilot_eps);
    read(t, "rho_bar_kbps", "traffic", cfg.rho_bar_kbps);
  }

  if (const auto s = root["simulation"]) {
    reject_unknown(s, "simulation", {"replications", "seed", "threads"});
    read(s, "replications", "simulation", cfg.replications);
    read(s, "seed", "simulation", cfg.seed);
    read(s, "threads", "simulation", cfg.threads);
  }

  if (const auto s = root["solver"]) {
    reject_unknown(s, "solver", {"tol", "max_iter", "relaxation"});
    read(s, "tol", "solver", cfg.solver.tol);
    read(s, "max_iter", "solver", cfg.solver.max_iter);
    read(s, "relaxation", "solver", cfg.solver.relaxation);
  }

  if (const auto m = root["meancell"]) {
    reject_unknown(m, "meancell", {"samples", "seed", "tol", "max_iter", "network"});
    read(m, "samples", "meancell", cfg.mean_cell.samples);
    read(m, "seed", "meancell", cfg.mean_cell.seed);
    read(m, "tol", "meancell", cfg.mean_cell.tol);
    read(m, "max_iter", "meancell", cfg.mean_cell.max_iter);
    std::string network = "equivalent";
    read(m, "network", "meancell", network);
    if (network == "equivalent") {
      cfg.mean_cell.network = MeanCellNetwork::equivalent;
    } else if (network == "heterogeneous") {
      cfg.mean_cell.network = MeanCellNetwork::heterogeneous;
    } else {
      throw ConfigError(where(m["network"], "meancell.network") + ": expected 'equivalent' or 'heterogeneous'");
    }
  }

  if (const auto o = root["output"]) {
    reject_unknown(o, "output", {"dir", "gnuplot"});
    read(o, "dir", "output", cfg.output_dir);
    read(o, "gnuplot", "output", cfg.gnuplot);
  }

  cfg.validate();
  return cfg;
}

/// Thrown when a file cannot be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_scenario(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace hetnet::harness
