#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "cachesdp/analysis.hpp"
#include "cachesdp/catalog.hpp"
#include "cachesdp/channel.hpp"
#include "cachesdp/config.hpp"
#include "cachesdp/hypergeometric.hpp"
#include "cachesdp/quadrature.hpp"

namespace cachesdp {

// Dense-network objective: every user is served over the LoS branch of the first
// segment, interferer activity follows Q_i lambda_u / (S_i lambda_s) so the interference
// exponents do not depend on S. The r-integrals run over [0, d] with d the end of the
// first segment (d_T for TUs, d_A for UAVs) on composite Gauss-Legendre panels.
class DenseObjective {
 public:
  struct Options {
    quad::Options inner{1e-13, 1e-10, 4000, 1e-10, 200};
    double first_panel = 0.0;  // m; <= 0 picks 0.1 / sqrt(pi lambda_s)
    double panel_ratio = 2.0;
    int gl_points = 20;
  };

  DenseObjective(const ZipfCatalog& catalog, const NetworkConfig& cfg, const PathLossModel& tu_model,
                 const PathLossModel& uav_model, Options opt)
      : q_(catalog.pmf), cfg_(cfg), opt_(opt) {
    validate(cfg_);
    validate_pmf(q_, "request pmf");
    tu_ = build(tu_model, cfg_.tu_density);
    uav_ = build(uav_model, cfg_.au_density);
  }

  DenseObjective(const ZipfCatalog& catalog, const NetworkConfig& cfg, const PathLossModel& tu_model,
                 const PathLossModel& uav_model)
      : DenseObjective(catalog, cfg, tu_model, uav_model, Options{}) {}

  std::size_t size() const { return q_.size(); }
  const NetworkConfig& config() const { return cfg_; }
  const std::vector<double>& pmf() const { return q_; }

  // B/C (TU) or E/F (UAV) at node k: other-tier and same-tier exponents, both <= 0.
  struct Exponents {
    double other, same;
  };
  Exponents tu_exponents(std::size_t k) const { return exps(tu_, k); }
  Exponents uav_exponents(std::size_t k) const { return exps(uav_, k); }
  const std::vector<double>& tu_nodes() const { return tu_.r; }
  const std::vector<double>& uav_nodes() const { return uav_.r; }

  // G_n(r) and H_n(r) evaluated at the quadrature nodes.
  double g_at(std::size_t n, std::size_t k) const { return tu_.kern[n][k]; }
  double h_at(std::size_t n, std::size_t k) const { return uav_.kern[n][k]; }

  // int_0^d G_n exp(-pi S lambda_s r^2) dr (tu) and the H_n analogue (uav).
  double tu_integral(std::size_t n, double s) const { return integral(tu_, n, s, false); }
  double uav_integral(std::size_t n, double s) const { return integral(uav_, n, s, false); }

  // Q_n S [tu + uav]: the n-th summand of the objective.
  double file_value(std::size_t n, double s) const {
    if (s == 0.0) return 0.0;
    return q_[n] * s * (integral(tu_, n, s, false) + integral(uav_, n, s, false));
  }

  // d/dS of file_value: Q_n int (G_n + H_n)(1 - W S) exp(-W S), W = pi lambda_s r^2.
  double file_derivative(std::size_t n, double s) const {
    return q_[n] * (integral(tu_, n, s, true) + integral(uav_, n, s, true));
  }

  struct Value {
    double average = 0.0;
    double tu = 0.0;   // TU-only average
    double uav = 0.0;  // UAV-only average
  };

  Value evaluate(const CacheVector& cache) const {
    if (cache.size() != q_.size()) throw ValidationError("cache vector and catalog differ in length");
    Value v;
    double tu_part = 0.0, uav_part = 0.0;
    for (std::size_t n = 0; n < q_.size(); ++n) {
      const double s = cache[n];
      if (s == 0.0) continue;
      tu_part += q_[n] * s * integral(tu_, n, s, false);
      uav_part += q_[n] * s * integral(uav_, n, s, false);
    }
    v.average = tu_part + uav_part;
    const double wt = cfg_.tu_density / cfg_.ue_density();
    const double wa = cfg_.au_density / cfg_.ue_density();
    v.tu = wt > 0 ? tu_part / wt : 0.0;
    v.uav = wa > 0 ? uav_part / wa : 0.0;
    return v;
  }

 private:
  struct Side {
    std::vector<double> r, wgt, area;  // nodes, weights, pi lambda_s r^2
    std::vector<double> j0, jex;       // interference integrals at each node
    std::vector<std::vector<double>> kern;  // [file][node] G_n or H_n
  };

  Side build(const PathLossModel& model, double tier_density) const {
    Side s;
    const double d = model.segments().front().r_hi;
    const quad::GaussLegendre gl(opt_.gl_points);
    std::vector<double> edges{0.0};
    const double first =
        opt_.first_panel > 0 ? opt_.first_panel : 0.1 / std::sqrt(std::numbers::pi * cfg_.sbs_density);
    for (double x = first; x < d; x *= opt_.panel_ratio) edges.push_back(x);
    edges.push_back(d);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const double c = 0.5 * (edges[p] + edges[p + 1]);
      const double half = 0.5 * (edges[p + 1] - edges[p]);
      for (int i = 0; i < opt_.gl_points; ++i) {
        s.r.push_back(c + half * gl.nodes[i]);
        s.wgt.push_back(half * gl.weights[i]);
      }
    }
    const LinkIntegrals li(model, cfg_.sinr_threshold, opt_.inner);
    const auto& seg = model.segments().front();
    const std::size_t nk = s.r.size();
    s.area.resize(nk);
    s.j0.resize(nk);
    s.jex.resize(nk);
    for (std::size_t k = 0; k < nk; ++k) {
      const double r = s.r[k];
      const double g = seg.gain(LinkState::Los, model.distance(r));
      const double r1 = model.inverse_gain(LinkState::Nlos, g);
      s.area[k] = std::numbers::pi * cfg_.sbs_density * r * r;
      s.j0[k] = quad::checked(li.interference_total(g), "dense interference").value;
      s.jex[k] = quad::checked(li.interference(LinkState::Los, 0.0, r, g), "dense interference").value +
                 quad::checked(li.interference(LinkState::Nlos, 0.0, r1, g), "dense interference").value;
    }
    const double lam_u = cfg_.ue_density();
    const double two_pi = 2.0 * std::numbers::pi;
    s.kern.assign(q_.size(), std::vector<double>(nk, 0.0));
    for (std::size_t n = 0; n < q_.size(); ++n) {
      for (std::size_t k = 0; k < nk; ++k) {
        // sum_{i != n} Q_i B + Q_n C with B = -2 pi lambda_u J0, C = -2 pi lambda_u (J0 - Jex)
        const double expo = -two_pi * lam_u * (s.j0[k] - q_[n] * s.jex[k]);
        s.kern[n][k] = tier_density * two_pi * cfg_.sbs_density * s.r[k] / lam_u * std::exp(expo);
      }
    }
    return s;
  }

  Exponents exps(const Side& s, std::size_t k) const {
    const double c = -2.0 * std::numbers::pi * cfg_.ue_density();
    return {c * s.j0[k], c * (s.j0[k] - s.jex[k])};
  }

  static double integral(const Side& s, std::size_t n, double sv, bool derivative) {
    const auto& kern = s.kern[n];
    double acc = 0.0;
    for (std::size_t k = 0; k < s.r.size(); ++k) {
      const double ws = s.area[k] * sv;
      const double e = std::exp(-ws);
      acc += s.wgt[k] * kern[k] * (derivative ? e * (1.0 - ws) : e);
    }
    return acc;
  }

  std::vector<double> q_;
  NetworkConfig cfg_;
  Options opt_;
  Side tu_, uav_;
};

inline double avg_sdp_dense(const ZipfCatalog& catalog, const CacheVector& cache, const NetworkConfig& cfg,
                            const PathLossModel& tu_model, const PathLossModel& uav_model) {
  validate(cache, 1e-6);
  return DenseObjective(catalog, cfg, tu_model, uav_model).evaluate(cache).average;
}

// Single-slope l^-alpha channel, always LoS.
struct SingleSlopeModel {
  double alpha = 4.0;
  double height_diff = 8.5;
};

inline void validate(const SingleSlopeModel& m) {
  if (!(m.alpha > 2)) throw DomainError("single-slope exponent must be > 2");
  if (!(m.height_diff >= 0)) throw ValidationError("height difference must be >= 0");
}

namespace detail {
inline double coverage_floor(const NetworkConfig& cfg, const SingleSlopeModel& m) {
  const double f = f_delta_alpha(cfg.sinr_threshold, m.alpha);
  return std::exp(-std::numbers::pi * m.height_diff * m.height_diff * cfg.ue_density() * f);
}
}  // namespace detail

// sum_n Q_n S_n exp(-pi h^2 lambda_u F) / (S_n + (lambda_u/lambda_s) F).
inline double avg_sdp_single_slope(const ZipfCatalog& catalog, const CacheVector& cache, const NetworkConfig& cfg,
                                   const SingleSlopeModel& model) {
  validate(model);
  if (cache.size() != catalog.size()) throw ValidationError("cache vector and catalog differ in length");
  const double f = f_delta_alpha(cfg.sinr_threshold, model.alpha);
  const double floor = detail::coverage_floor(cfg, model);
  const double ratio = cfg.ue_density() / cfg.sbs_density;
  double acc = 0.0;
  for (std::size_t n = 0; n < cache.size(); ++n) {
    const double s = cache[n];
    if (s > 0) acc += catalog[n] * s * floor / (s + ratio * f);
  }
  return acc;
}

// Same-tier interference integral int_r^inf u / (1 + l^-alpha delta^-1 (u^2+h^2)^(alpha/2)) du
// with l = sqrt(r^2 + h^2); equals (l^2/2) F(delta, alpha).
inline double single_slope_same_tier(double delta, double alpha, double l) {
  return 0.5 * l * l * f_delta_alpha(delta, alpha);
}

// Other-tier integral from u = 0:
// (l^2/2) (2 delta/(alpha-2)) (l/h)^(alpha-2) 2F1(1, 1-2/alpha; 2-2/alpha; -delta (l/h)^alpha).
inline double single_slope_other_tier(double delta, double alpha, double l, double h) {
  if (!(alpha > 2)) throw DomainError("single-slope exponent must be > 2");
  if (!(h > 0)) throw DomainError("other-tier closed form needs h > 0");
  const double b = 1.0 - 2.0 / alpha;
  const double ratio = l / h;
  return 0.5 * l * l * 2.0 * delta / (alpha - 2.0) * std::pow(ratio, alpha - 2.0) *
         hyp2f1_1b(b, b + 1.0, -delta * std::pow(ratio, alpha));
}

// Direct quadrature of the noise-free single-slope average SDP: nearest-SBS PDF per
// tier, other tiers interfering from u = 0 and the own tier from u = r.
inline double avg_sdp_single_slope_quadrature(const ZipfCatalog& catalog, const CacheVector& cache,
                                              const NetworkConfig& cfg, const SingleSlopeModel& model,
                                              ActiveMode mode = ActiveMode::Approx, quad::Options opt = {}) {
  validate(model);
  validate(cfg);
  const auto w = active_densities(catalog, cache, cfg, mode);
  double w_all = 0.0;
  for (double v : w) w_all += v;
  const double delta = cfg.sinr_threshold;
  const double h = model.height_diff;
  const double two_pi = 2.0 * std::numbers::pi;
  const PathLossModel pl = make_single_slope_model(model.alpha, h);
  const LinkIntegrals li(pl, delta, opt);
  double acc = 0.0;
  for (std::size_t n = 0; n < cache.size(); ++n) {
    const double s = cache[n];
    if (!(s > 0)) continue;
    const double rho = s * cfg.sbs_density;
    auto f = [&](double r) {
      const double g = gain_los(pl, r);
      const double j_all = quad::checked(li.interference_total(g), "single-slope interference").value;
      const double j_in = quad::checked(li.interference(LinkState::Los, 0.0, r, g), "single-slope interference").value;
      return std::exp(-two_pi * (w_all * j_all - w[n] * j_in) - std::numbers::pi * rho * r * r) * two_pi * rho * r;
    };
    const double scale = 1.0 / std::sqrt(rho);
    const auto part = quad::integrate(f, 0.0, scale, opt);
    auto tail = quad::integrate_to_infinity(f, scale, scale, opt);
    tail += part;
    acc += catalog[n] * quad::checked(tail, "single-slope SDP").value;
  }
  return acc;
}

struct StrategyLimits {
  double pcs = 0.0;
  double ucs = 0.0;
};

// lambda_s -> inf: PCS sum_{n<=M} Q_n exp(-pi h^2 lambda_u F), UCS exp(-pi h^2 lambda_u F).
inline StrategyLimits limit_dense(const ZipfCatalog& catalog, std::size_t m, const NetworkConfig& cfg,
                                  const SingleSlopeModel& model) {
  validate(model);
  check_budget(catalog.size(), m);
  const double floor = detail::coverage_floor(cfg, model);
  double head = 0.0;
  for (std::size_t n = 0; n < m; ++n) head += catalog[n];
  return {head * floor, floor};
}

// beta -> inf, as printed: PCS exp(.)/(1 + (lambda_u/lambda_s) F), UCS exp(.)/(1 + N lambda_u/(M lambda_s) F).
inline StrategyLimits limit_beta(std::size_t m, std::size_t n_files, const NetworkConfig& cfg,
                                 const SingleSlopeModel& model) {
  validate(model);
  check_budget(n_files, m);
  const double f = f_delta_alpha(cfg.sinr_threshold, model.alpha);
  const double floor = detail::coverage_floor(cfg, model);
  const double ratio = cfg.ue_density() / cfg.sbs_density;
  return {floor / (1.0 + ratio * f),
          floor / (1.0 + static_cast<double>(n_files) / static_cast<double>(m) * ratio * f)};
}

}  // namespace cachesdp
