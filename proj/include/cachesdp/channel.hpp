#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cachesdp/config.hpp"
#include "cachesdp/error.hpp"

namespace cachesdp {

enum class LinkState { Los, Nlos };

// How the LoS probability behaves on a segment. AlwaysLos/NeverLos let callers drop
// the vanishing term exactly instead of integrating a zero weight.
enum class LosRegime { Mixed, AlwaysLos, NeverLos };

using LosProbability = std::function<double(double r, double h)>;

struct PathLossSegment {
  double r_lo = 0.0;
  double r_hi = std::numeric_limits<double>::infinity();
  double a_los = 1.0;    // linear gain at l = 1 m
  double a_nlos = 1.0;
  double alpha_los = 2.0;
  double alpha_nlos = 2.0;
  LosProbability los_prob;
  LosRegime regime = LosRegime::Mixed;

  bool contains(double r) const { return r > r_lo && r <= r_hi; }

  double gain(LinkState s, double l) const {
    return s == LinkState::Los ? a_los * std::pow(l, -alpha_los) : a_nlos * std::pow(l, -alpha_nlos);
  }
};

// Piecewise LoS/NLoS path loss for one SBS-to-user height difference. Distances passed
// in are horizontal; gains use the 3D distance l = sqrt(r^2 + h^2).
class PathLossModel {
 public:
  PathLossModel(std::vector<PathLossSegment> segments, double height_diff)
      : segments_(std::move(segments)), h_(height_diff) {
    if (segments_.empty()) throw GeometryError("path loss model needs at least one segment");
    if (!(h_ >= 0)) throw GeometryError("height difference must be >= 0");
    if (segments_.front().r_lo != 0.0) throw GeometryError("first segment must start at r = 0");
    for (std::size_t k = 0; k < segments_.size(); ++k) {
      const auto& s = segments_[k];
      if (!(s.r_lo < s.r_hi)) throw GeometryError("segment " + std::to_string(k) + " is empty");
      if (!(s.a_los > 0 && s.a_nlos > 0 && s.alpha_los > 0 && s.alpha_nlos > 0))
        throw GeometryError("segment " + std::to_string(k) + " has non-positive gain parameters");
      if (k + 1 < segments_.size() && segments_[k + 1].r_lo != s.r_hi)
        throw GeometryError("segments must tile (0, inf)");
      if (!s.los_prob && s.regime == LosRegime::Mixed)
        throw GeometryError("mixed segment needs a LoS probability function");
    }
    if (!std::isinf(segments_.back().r_hi)) throw GeometryError("last segment must extend to infinity");
  }

  const std::vector<PathLossSegment>& segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }
  double height_diff() const { return h_; }

  // Boundaries d_0 = 0, d_1, ..., d_K = inf.
  std::vector<double> breakpoints() const {
    std::vector<double> b;
    b.reserve(segments_.size() + 1);
    for (const auto& s : segments_) b.push_back(s.r_lo);
    b.push_back(std::numeric_limits<double>::infinity());
    return b;
  }

  double distance(double r) const { return std::sqrt(r * r + h_ * h_); }

  // r = 0 belongs to the first segment; boundaries belong to the lower segment.
  std::size_t segment_index(double r) const {
    for (std::size_t k = 0; k < segments_.size(); ++k)
      if (r <= segments_[k].r_hi) return k;
    return segments_.size() - 1;
  }

  const PathLossSegment& segment_at(double r) const { return segments_[segment_index(r)]; }

  double los_prob(double r) const {
    const auto& s = segment_at(r);
    switch (s.regime) {
      case LosRegime::AlwaysLos: return 1.0;
      case LosRegime::NeverLos: return 0.0;
      case LosRegime::Mixed: break;
    }
    const double p = s.los_prob(r, h_);
    return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
  }

  double gain(LinkState st, double r) const { return segment_at(r).gain(st, distance(r)); }

  // Horizontal distance at which the piecewise gain for state st first drops to g.
  // Returns 0 when even r = 0 is weaker than g.
  double inverse_gain(LinkState st, double g) const {
    if (gain(st, 0.0) <= g) return 0.0;
    for (const auto& s : segments_) {
      const double a = st == LinkState::Los ? s.a_los : s.a_nlos;
      const double alpha = st == LinkState::Los ? s.alpha_los : s.alpha_nlos;
      const double l = std::pow(a / g, 1.0 / alpha);
      const double r2 = l * l - h_ * h_;
      const double x = r2 > 0 ? std::sqrt(r2) : 0.0;
      if (x > s.r_lo && x <= s.r_hi) return x;
      if (x == 0.0 && s.r_lo == 0.0) return 0.0;
    }
    // Gain jumps across a boundary: bisect on the first crossing.
    double lo = 0.0, hi = 1.0;
    while (gain(st, hi) > g) {
      hi *= 2.0;
      if (!std::isfinite(hi)) return std::numeric_limits<double>::infinity();
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (gain(st, mid) > g ? lo : hi) = mid;
    }
    return hi;
  }

 private:
  std::vector<PathLossSegment> segments_;
  double h_;
};

inline double gain_los(const PathLossModel& m, double r) { return m.gain(LinkState::Los, r); }
inline double gain_nlos(const PathLossModel& m, double r) { return m.gain(LinkState::Nlos, r); }

namespace detail {
inline void require_in_segment(const PathLossModel& m, double r, std::size_t k) {
  if (k >= m.size()) throw ValidationError("segment index out of range");
  const auto& s = m.segments()[k];
  if (!(s.contains(r) || (k == 0 && r == 0.0)))
    throw ValidationError("r = " + std::to_string(r) + " is not in segment " + std::to_string(k));
}
}  // namespace detail

// r1: distance at which an NLoS link is as strong as the LoS link of segment k at r.
inline double equiv_dist_r1(const PathLossModel& m, double r, std::size_t k) {
  detail::require_in_segment(m, r, k);
  return m.inverse_gain(LinkState::Nlos, m.segments()[k].gain(LinkState::Los, m.distance(r)));
}

// r2: distance at which a LoS link is as strong as the NLoS link of segment k at r.
inline double equiv_dist_r2(const PathLossModel& m, double r, std::size_t k) {
  detail::require_in_segment(m, r, k);
  return m.inverse_gain(LinkState::Los, m.segments()[k].gain(LinkState::Nlos, m.distance(r)));
}

namespace table2 {
// Terrestrial users (3GPP small-cell model).
inline const double kTuALos = std::pow(10.0, -4.11);
inline const double kTuANlos = std::pow(10.0, -3.29);
inline constexpr double kTuAlphaLos = 2.09;
inline constexpr double kTuAlphaNlos = 3.75;
// Aerial users; exponents depend on the UAV height.
inline const double kUavALos = std::pow(10.0, -3.692);
inline const double kUavANlos = std::pow(10.0, -3.842);
inline double uav_alpha_los(double h_au) { return 2.225 - 0.05 * std::log10(h_au); }
inline double uav_alpha_nlos(double h_au) { return 4.32 - 0.76 * std::log10(h_au); }
}  // namespace table2

// Terrestrial model: linear LoS probability 1 - l/l0 up to d_T = sqrt(l0^2 - h1^2),
// pure NLoS beyond.
inline PathLossModel make_tu_model(const NetworkConfig& cfg, double cutoff_l0) {
  const double h1 = cfg.tu_height_diff();
  if (!(h1 > 0)) throw GeometryError("SBS must be above the terrestrial users");
  if (!(cutoff_l0 > h1)) throw GeometryError("LoS cutoff l0 must exceed h1 = " + std::to_string(h1));
  const double d_t = std::sqrt(cutoff_l0 * cutoff_l0 - h1 * h1);
  PathLossSegment near;
  near.r_lo = 0.0;
  near.r_hi = d_t;
  near.a_los = table2::kTuALos;
  near.a_nlos = table2::kTuANlos;
  near.alpha_los = table2::kTuAlphaLos;
  near.alpha_nlos = table2::kTuAlphaNlos;
  near.los_prob = [cutoff_l0](double r, double h) { return 1.0 - std::sqrt(r * r + h * h) / cutoff_l0; };
  PathLossSegment far = near;
  far.r_lo = d_t;
  far.r_hi = std::numeric_limits<double>::infinity();
  far.los_prob = [](double, double) { return 0.0; };
  far.regime = LosRegime::NeverLos;
  return PathLossModel({near, far}, h1);
}

inline PathLossModel make_tu_model(const NetworkConfig& cfg) { return make_tu_model(cfg, cfg.tu_los_cutoff); }

struct UavLosParams {
  double p1;
  double d_a;
};

inline UavLosParams uav_los_params(double h_au) {
  const double lg = std::log10(h_au);
  return {233.98 * lg - 0.95, std::max(294.05 * lg - 432.94, 18.0)};
}

// Aerial model: LoS for r <= d_A, then d_A/r + exp(-r/p1)(1 - d_A/r).
inline PathLossModel make_uav_model(const NetworkConfig& cfg) {
  const double h_au = cfg.uav_height;
  if (!(h_au >= kMinUavHeight && h_au <= kMaxUavHeight))
    throw ValidationError("uav_height " + std::to_string(h_au) + " m outside 22.5..300 m");
  const double h2 = cfg.uav_height_diff();
  if (!(h2 > 0)) throw GeometryError("UAVs must fly above the SBSs");
  const auto [p1, d_a] = uav_los_params(h_au);
  PathLossSegment near;
  near.r_lo = 0.0;
  near.r_hi = d_a;
  near.a_los = table2::kUavALos;
  near.a_nlos = table2::kUavANlos;
  near.alpha_los = table2::uav_alpha_los(h_au);
  near.alpha_nlos = table2::uav_alpha_nlos(h_au);
  near.los_prob = [](double, double) { return 1.0; };
  near.regime = LosRegime::AlwaysLos;
  PathLossSegment far = near;
  far.r_lo = d_a;
  far.r_hi = std::numeric_limits<double>::infinity();
  far.los_prob = [d_a, p1](double r, double) { return d_a / r + std::exp(-r / p1) * (1.0 - d_a / r); };
  far.regime = LosRegime::Mixed;
  return PathLossModel({near, far}, h2);
}

// Single-slope, always-LoS model l^-alpha (unit intercept).
inline PathLossModel make_single_slope_model(double alpha, double h) {
  PathLossSegment s;
  s.a_los = s.a_nlos = 1.0;
  s.alpha_los = s.alpha_nlos = alpha;
  s.los_prob = [](double, double) { return 1.0; };
  s.regime = LosRegime::AlwaysLos;
  return PathLossModel({s}, h);
}

}  // namespace cachesdp
