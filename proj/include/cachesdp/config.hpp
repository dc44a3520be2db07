#pragma once

#include <cmath>
#include <string>

#include "cachesdp/error.hpp"

namespace cachesdp {

namespace units {

inline constexpr double kPerKm2 = 1e-6;  // 1/km^2 expressed in 1/m^2

inline double per_km2(double v) { return v * kPerKm2; }
inline double to_per_km2(double v) { return v / kPerKm2; }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace units

inline constexpr double kMinUavHeight = 22.5;
inline constexpr double kMaxUavHeight = 300.0;

// Network parameters, SI units throughout (m, W, 1/m^2, linear ratios).
struct NetworkConfig {
  double sbs_density = units::per_km2(1e4);
  double tu_density = units::per_km2(150.0);
  double au_density = units::per_km2(150.0);
  double tx_power = units::dbm_to_watts(24.0);
  double noise_power = 0.0;
  double sinr_threshold = units::db_to_linear(-6.0);
  double sbs_height = 10.0;
  double tu_height = 1.5;
  double uav_height = 30.0;
  double onoff_q = 3.5;
  double tu_los_cutoff = 300.0;  // l0 of the linear terrestrial LoS model

  double ue_density() const { return tu_density + au_density; }
  double tu_height_diff() const { return sbs_height - tu_height; }
  double uav_height_diff() const { return uav_height - sbs_height; }
};

// Evaluation setup used throughout the figures: Table-II channel, h_BS = 10 m,
// P = 24 dBm, delta = -6 dB, h_AU = 30 m, 150 TUs and 150 UAVs per km^2.
inline NetworkConfig default_config() { return NetworkConfig{}; }

inline void validate(const NetworkConfig& cfg) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
  };
  require(std::isfinite(cfg.sbs_density) && cfg.sbs_density > 0, "sbs_density must be > 0");
  require(std::isfinite(cfg.tu_density) && cfg.tu_density >= 0, "tu_density must be >= 0");
  require(std::isfinite(cfg.au_density) && cfg.au_density >= 0, "au_density must be >= 0");
  require(cfg.ue_density() > 0, "at least one user density must be > 0");
  require(std::isfinite(cfg.tx_power) && cfg.tx_power > 0, "tx_power must be > 0");
  require(std::isfinite(cfg.noise_power) && cfg.noise_power >= 0, "noise_power must be >= 0");
  require(std::isfinite(cfg.sinr_threshold) && cfg.sinr_threshold > 0,
          "sinr_threshold must be > 0");
  require(std::isfinite(cfg.onoff_q) && cfg.onoff_q > 0, "onoff_q must be > 0");
  require(cfg.tu_height_diff() > 0, "sbs_height must exceed tu_height");
  require(cfg.uav_height_diff() > 0, "uav_height must exceed sbs_height");
  require(cfg.uav_height >= kMinUavHeight && cfg.uav_height <= kMaxUavHeight,
          "uav_height outside the channel model's 22.5..300 m range");
  require(cfg.tu_los_cutoff > cfg.tu_height_diff(),
          "tu_los_cutoff must exceed the SBS-TU height difference");
}

}  // namespace cachesdp
