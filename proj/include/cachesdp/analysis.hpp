#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cachesdp/catalog.hpp"
#include "cachesdp/channel.hpp"
#include "cachesdp/config.hpp"
#include "cachesdp/error.hpp"
#include "cachesdp/quadrature.hpp"

namespace cachesdp {

// Which on-probability feeds the interferer densities.
enum class ActiveMode { Exact, Approx };
enum class Tier { TU, UAV, Combined };

inline const char* to_string(ActiveMode m) { return m == ActiveMode::Exact ? "exact" : "approx"; }
inline const char* to_string(Tier t) {
  switch (t) {
    case Tier::TU: return "tu";
    case Tier::UAV: return "uav";
    case Tier::Combined: return "combined";
  }
  return "?";
}

struct AnalysisOptions {
  quad::Options inner{1e-13, 1e-10, 4000, 1e-10, 200};
  quad::Options outer{1e-10, 1e-8, 4000, 1e-10, 200};
};

struct TierContext {
  ZipfCatalog catalog;
  CacheVector cache;
  NetworkConfig cfg;
  ActiveMode active_mode = ActiveMode::Exact;
  AnalysisOptions options{};
};

inline void validate(const TierContext& ctx) {
  validate(ctx.cfg);
  validate_pmf(ctx.catalog.pmf, "request pmf");
  validate(ctx.cache, 1e-6);
  if (ctx.cache.size() != ctx.catalog.size()) throw ValidationError("cache vector and catalog differ in length");
}

// Probability that an SBS is serving at least one of ue_density users per m^2 when
// sbs_density SBSs per m^2 share them (on-off lower bound with shape q).
inline double pr_active(double q, double ue_density, double sbs_density) {
  if (!(q > 0)) throw ValidationError("on-off parameter q must be > 0");
  if (!(sbs_density > 0)) throw ValidationError("sbs density must be > 0");
  if (!(ue_density >= 0)) throw ValidationError("ue density must be >= 0");
  return -std::expm1(-q * std::log1p(ue_density / (q * sbs_density)));
}

// Dense-network approximation Q_n lambda_u / (S_n lambda_s), clamped to 1.
inline double pr_active_approx(double q_n, double s_n, const NetworkConfig& cfg) {
  if (!(s_n > 0)) throw ValidationError("approximate on-probability needs S_n > 0");
  return std::min(q_n * cfg.ue_density() / (s_n * cfg.sbs_density), 1.0);
}

// Per-file density of transmitting SBSs, Pr(A_i) S_i lambda_s (0 when S_i = 0).
inline std::vector<double> active_densities(const ZipfCatalog& cat, const CacheVector& cache,
                                            const NetworkConfig& cfg, ActiveMode mode) {
  std::vector<double> w(cache.size(), 0.0);
  for (std::size_t i = 0; i < cache.size(); ++i) {
    const double s = cache[i];
    if (!(s > 0)) continue;
    const double rho = s * cfg.sbs_density;
    const double p = mode == ActiveMode::Exact ? pr_active(cfg.onoff_q, cat[i] * cfg.ue_density(), rho)
                                               : pr_active_approx(cat[i], s, cfg);
    w[i] = p * rho;
  }
  return w;
}

// Radial integrals of one path-loss model that do not depend on the file index.
class LinkIntegrals {
 public:
  LinkIntegrals(const PathLossModel& model, double delta, quad::Options opt = {})
      : m_(model), delta_(delta), opt_(opt) {}

  const PathLossModel& model() const { return m_; }

  // int_0^x Pr^L(u) u du, over all segments.
  double los_moment(double x) const {
    double acc = 0.0;
    for (const auto& s : m_.segments()) {
      if (x <= s.r_lo) break;
      const double b = std::min(x, s.r_hi);
      switch (s.regime) {
        case LosRegime::AlwaysLos: acc += 0.5 * (b * b - s.r_lo * s.r_lo); break;
        case LosRegime::NeverLos: break;
        case LosRegime::Mixed: {
          const double h = m_.height_diff();
          auto f = [&](double u) { return std::clamp(s.los_prob(u, h), 0.0, 1.0) * u; };
          acc += quad::checked(quad::integrate(f, s.r_lo, b, opt_), "LoS moment").value;
          break;
        }
      }
    }
    return acc;
  }

  // int_0^x (1 - Pr^L(u)) u du.
  double nlos_moment(double x) const {
    if (!(x > 0)) return 0.0;
    double acc = 0.0;
    for (const auto& s : m_.segments()) {
      if (x <= s.r_lo) break;
      const double b = std::min(x, s.r_hi);
      switch (s.regime) {
        case LosRegime::AlwaysLos: break;
        case LosRegime::NeverLos: acc += 0.5 * (b * b - s.r_lo * s.r_lo); break;
        case LosRegime::Mixed: {
          const double h = m_.height_diff();
          auto f = [&](double u) { return (1.0 - std::clamp(s.los_prob(u, h), 0.0, 1.0)) * u; };
          acc += quad::checked(quad::integrate(f, s.r_lo, b, opt_), "NLoS moment").value;
          break;
        }
      }
    }
    return acc;
  }

  // int_a^b w_X(u) u / (1 + g / (delta zeta_X(u))) du, where w_X is the LoS or NLoS
  // probability of an interferer at u. Multiply by 2 pi (active density) for the
  // log-Laplace transform at desired gain g.
  quad::Result interference(LinkState st, double a, double b, double g) const {
    quad::Result total;
    const double h = m_.height_diff();
    for (const auto& s : m_.segments()) {
      const double lo = std::max(a, s.r_lo);
      const double hi = std::min(b, s.r_hi);
      if (!(hi > lo)) continue;
      if (st == LinkState::Los && s.regime == LosRegime::NeverLos) continue;
      if (st == LinkState::Nlos && s.regime == LosRegime::AlwaysLos) continue;
      auto f = [&](double u) {
        double w = 1.0;
        if (s.regime == LosRegime::Mixed) {
          const double p = std::clamp(s.los_prob(u, h), 0.0, 1.0);
          w = st == LinkState::Los ? p : 1.0 - p;
        }
        const double z = s.gain(st, std::sqrt(u * u + h * h));
        return w * u / (1.0 + g / (delta_ * z));
      };
      if (std::isinf(hi))
        total += quad::integrate_to_infinity(f, lo, std::max({1.0, lo, h}), opt_);
      else
        total += quad::integrate(f, lo, hi, opt_);
    }
    return total;
  }

  // LoS plus NLoS interference integral over the whole plane.
  quad::Result interference_total(double g) const {
    quad::Result total;
    const double h = m_.height_diff();
    for (const auto& s : m_.segments()) {
      auto f = [&](double u) {
        const double l = std::sqrt(u * u + h * h);
        double p = 1.0;
        if (s.regime == LosRegime::NeverLos) p = 0.0;
        if (s.regime == LosRegime::Mixed) p = std::clamp(s.los_prob(u, h), 0.0, 1.0);
        double v = 0.0;
        if (p > 0.0) v += p / (1.0 + g / (delta_ * s.gain(LinkState::Los, l)));
        if (p < 1.0) v += (1.0 - p) / (1.0 + g / (delta_ * s.gain(LinkState::Nlos, l)));
        return u * v;
      };
      if (std::isinf(s.r_hi))
        total += quad::integrate_to_infinity(f, s.r_lo, std::max({1.0, s.r_lo, h}), opt_);
      else
        total += quad::integrate(f, s.r_lo, s.r_hi, opt_);
    }
    return total;
  }

 private:
  const PathLossModel& m_;
  double delta_;
  quad::Options opt_;
};

// Association PDFs of the serving link being LoS / NLoS at horizontal distance r in segment k.
inline double assoc_pdf_los(const PathLossModel& model, double tier_density, double r, std::size_t k) {
  detail::require_in_segment(model, r, k);
  const auto& seg = model.segments()[k];
  if (seg.regime == LosRegime::NeverLos) return 0.0;
  const LinkIntegrals li(model, 1.0);
  const double r1 = equiv_dist_r1(model, r, k);
  const double expo = li.nlos_moment(r1) + li.los_moment(r);
  return std::exp(-2.0 * std::numbers::pi * tier_density * expo) * model.los_prob(r) * 2.0 * std::numbers::pi * r *
         tier_density;
}

inline double assoc_pdf_nlos(const PathLossModel& model, double tier_density, double r, std::size_t k) {
  detail::require_in_segment(model, r, k);
  const auto& seg = model.segments()[k];
  if (seg.regime == LosRegime::AlwaysLos) return 0.0;
  const LinkIntegrals li(model, 1.0);
  const double r2 = equiv_dist_r2(model, r, k);
  const double expo = li.los_moment(r2) + li.nlos_moment(r);
  return std::exp(-2.0 * std::numbers::pi * tier_density * expo) * (1.0 - model.los_prob(r)) * 2.0 *
         std::numbers::pi * r * tier_density;
}

// Laplace transform of the interference seen by a user of file n whose serving link has
// gain gain_at_r at horizontal distance r. Other tiers interfere from everywhere; the
// same tier only from beyond the equivalent-distance exclusion region.
inline double laplace_interference(const TierContext& ctx, const PathLossModel& model, std::size_t n,
                                   double gain_at_r, double r, LinkState desired) {
  if (!(gain_at_r > 0)) throw ValidationError("desired gain must be > 0");
  if (!(r >= 0)) throw ValidationError("r must be >= 0");
  if (n >= ctx.cache.size()) throw ValidationError("file index out of range");
  const auto w = active_densities(ctx.catalog, ctx.cache, ctx.cfg, ctx.active_mode);
  double w_all = 0.0;
  for (double v : w) w_all += v;
  if (w_all == 0.0) return 1.0;
  const LinkIntegrals li(model, ctx.cfg.sinr_threshold, ctx.options.inner);
  const double j0 = quad::checked(li.interference_total(gain_at_r), "interference").value;
  const double lo_los = desired == LinkState::Los ? r : model.inverse_gain(LinkState::Los, gain_at_r);
  const double lo_nlos = desired == LinkState::Nlos ? r : model.inverse_gain(LinkState::Nlos, gain_at_r);
  const double jex = quad::checked(li.interference(LinkState::Los, 0.0, lo_los, gain_at_r), "interference").value +
                     quad::checked(li.interference(LinkState::Nlos, 0.0, lo_nlos, gain_at_r), "interference").value;
  return std::exp(-2.0 * std::numbers::pi * (w_all * j0 - w[n] * jex));
}

struct SegmentTerms {
  double los = 0.0;
  double nlos = 0.0;
};

struct SdpReport {
  Tier tier = Tier::Combined;
  ActiveMode mode = ActiveMode::Exact;
  std::vector<double> per_file;
  std::vector<std::vector<SegmentTerms>> per_file_terms;  // [file][segment]
  double average = 0.0;
  double abs_error = 0.0;  // quadrature error estimate carried into the average
  long evaluations = 0;
  std::vector<SdpReport> tiers;  // TU and UAV parts of a combined report
};

namespace detail {

// Geometric panel edges inside [lo, hi] so that the adaptive rule sees every density scale.
inline std::vector<double> panel_edges(double lo, double hi, double first) {
  std::vector<double> e{lo};
  for (double x = first; x < hi; x *= 4.0)
    if (x > lo) e.push_back(x);
  e.push_back(hi);
  return e;
}

}  // namespace detail

// Per-file SDPs for one user tier. Only files with S_n > 0 are integrated.
inline SdpReport tier_sdp(const TierContext& ctx, const PathLossModel& model, Tier tier,
                          const std::vector<std::size_t>& files) {
  validate(ctx);
  const auto& cfg = ctx.cfg;
  const std::size_t n_files = ctx.cache.size();
  const auto w = active_densities(ctx.catalog, ctx.cache, cfg, ctx.active_mode);
  double w_all = 0.0;
  for (double v : w) w_all += v;

  SdpReport rep;
  rep.tier = tier;
  rep.mode = ctx.active_mode;
  rep.per_file.assign(n_files, 0.0);
  rep.per_file_terms.assign(n_files, std::vector<SegmentTerms>(model.size()));

  std::vector<std::size_t> live;
  for (std::size_t n : files) {
    if (n >= n_files) throw ValidationError("file index out of range");
    if (ctx.cache[n] > 0) live.push_back(n);
  }
  std::vector<double> abs_err(n_files, 0.0);
  if (!live.empty()) {
    std::vector<double> rho(live.size()), wl(live.size());
    double rho_min = std::numeric_limits<double>::infinity(), rho_max = 0.0;
    for (std::size_t j = 0; j < live.size(); ++j) {
      rho[j] = ctx.cache[live[j]] * cfg.sbs_density;
      wl[j] = w[live[j]];
      rho_min = std::min(rho_min, rho[j]);
      rho_max = std::max(rho_max, rho[j]);
    }
    const LinkIntegrals li(model, cfg.sinr_threshold, ctx.options.inner);
    const double two_pi = 2.0 * std::numbers::pi;
    const quad::VectorIntegrator vi(live.size(), ctx.options.outer);

    for (std::size_t k = 0; k < model.size(); ++k) {
      const auto& seg = model.segments()[k];
      for (LinkState st : {LinkState::Los, LinkState::Nlos}) {
        if (st == LinkState::Los && seg.regime == LosRegime::NeverLos) continue;
        if (st == LinkState::Nlos && seg.regime == LosRegime::AlwaysLos) continue;
        auto integrand = [&](double r, std::span<double> out) {
          std::fill(out.begin(), out.end(), 0.0);
          double p = 1.0;
          if (seg.regime == LosRegime::NeverLos) p = 0.0;
          if (seg.regime == LosRegime::Mixed) p = std::clamp(seg.los_prob(r, model.height_diff()), 0.0, 1.0);
          const double factor = (st == LinkState::Los ? p : 1.0 - p) * two_pi * r;
          if (!(factor > 0)) return;
          const double g = seg.gain(st, model.distance(r));
          const LinkState other = st == LinkState::Los ? LinkState::Nlos : LinkState::Los;
          const double r_eq = model.inverse_gain(other, g);
          const double expo = st == LinkState::Los ? li.nlos_moment(r_eq) + li.los_moment(r)
                                                   : li.los_moment(r_eq) + li.nlos_moment(r);
          if (two_pi * rho_min * expo > 745.0) return;
          const double noise = cfg.noise_power > 0 ? std::exp(-cfg.sinr_threshold * cfg.noise_power / (cfg.tx_power * g)) : 1.0;
          double j0 = 0.0, jex = 0.0;
          if (w_all > 0) {
            j0 = quad::checked(li.interference_total(g), "interference").value;
            const double lo_los = st == LinkState::Los ? r : r_eq;
            const double lo_nlos = st == LinkState::Nlos ? r : r_eq;
            jex = quad::checked(li.interference(LinkState::Los, 0.0, lo_los, g), "interference").value +
                  quad::checked(li.interference(LinkState::Nlos, 0.0, lo_nlos, g), "interference").value;
          }
          for (std::size_t j = 0; j < out.size(); ++j)
            out[j] = noise * std::exp(-two_pi * (w_all * j0 - wl[j] * jex + rho[j] * expo)) * rho[j] * factor;
        };

        quad::VectorIntegrator::VectorResult acc;
        acc.value.assign(live.size(), 0.0);
        acc.abs_error.assign(live.size(), 0.0);
        auto add = [&](const quad::VectorIntegrator::VectorResult& part) {
          for (std::size_t j = 0; j < live.size(); ++j) {
            acc.value[j] += part.value[j];
            acc.abs_error[j] += part.abs_error[j];
          }
          acc.evaluations += part.evaluations;
          acc.converged = acc.converged && part.converged;
        };
        const double first = 0.1 / std::sqrt(rho_max);
        if (std::isinf(seg.r_hi)) {
          add(vi.integrate_to_infinity(integrand, seg.r_lo, std::max(seg.r_lo, 1.0 / std::sqrt(rho_min))));
        } else {
          const auto edges = detail::panel_edges(seg.r_lo, seg.r_hi, first);
          for (std::size_t e = 0; e + 1 < edges.size(); ++e) add(vi.integrate(integrand, edges[e], edges[e + 1]));
        }
        if (!acc.converged) {
          double v = 0.0, er = 0.0;
          for (std::size_t j = 0; j < live.size(); ++j) {
            v += acc.value[j];
            er += acc.abs_error[j];
          }
          throw NumericalError(std::string("SDP integral (") + to_string(tier) + ", segment " + std::to_string(k) +
                                   ") did not converge",
                               v, er, static_cast<int>(acc.evaluations));
        }
        rep.evaluations += acc.evaluations;
        for (std::size_t j = 0; j < live.size(); ++j) {
          auto& t = rep.per_file_terms[live[j]][k];
          (st == LinkState::Los ? t.los : t.nlos) = acc.value[j];
          abs_err[live[j]] += acc.abs_error[j];
        }
      }
    }
    for (std::size_t n : live) {
      double s = 0.0;
      for (const auto& t : rep.per_file_terms[n]) s += t.los + t.nlos;
      rep.per_file[n] = std::clamp(s, 0.0, 1.0);
    }
  }
  for (std::size_t n = 0; n < n_files; ++n) {
    rep.average += ctx.catalog[n] * rep.per_file[n];
    rep.abs_error += ctx.catalog[n] * abs_err[n];
  }
  return rep;
}

inline SdpReport tier_sdp(const TierContext& ctx, const PathLossModel& model, Tier tier) {
  std::vector<std::size_t> all(ctx.cache.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return tier_sdp(ctx, model, tier, all);
}

inline double sdp_file(const TierContext& ctx, const PathLossModel& model, std::size_t n) {
  if (n >= ctx.cache.size()) throw ValidationError("file index out of range");
  if (!(ctx.cache[n] > 0)) return 0.0;
  return tier_sdp(ctx, model, Tier::Combined, {n}).per_file[n];
}

namespace detail {

inline SdpReport combine(const TierContext& ctx, SdpReport tu, SdpReport uav, const std::vector<double>& q_tu,
                         const std::vector<double>& q_uav) {
  const double wt = ctx.cfg.tu_density / ctx.cfg.ue_density();
  const double wa = ctx.cfg.au_density / ctx.cfg.ue_density();
  SdpReport rep;
  rep.tier = Tier::Combined;
  rep.mode = ctx.active_mode;
  const std::size_t n = ctx.cache.size();
  rep.per_file.assign(n, 0.0);
  tu.average = uav.average = tu.abs_error = uav.abs_error = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rep.per_file[i] = wt * tu.per_file[i] + wa * uav.per_file[i];
    tu.average += q_tu[i] * tu.per_file[i];
    uav.average += q_uav[i] * uav.per_file[i];
  }
  rep.average = wt * tu.average + wa * uav.average;
  rep.evaluations = tu.evaluations + uav.evaluations;
  rep.tiers = {std::move(tu), std::move(uav)};
  return rep;
}

inline std::pair<SdpReport, SdpReport> both_tiers(const TierContext& ctx, const PathLossModel& tu_model,
                                                   const PathLossModel& uav_model) {
  auto uav = std::async(std::launch::async, [&] { return tier_sdp(ctx, uav_model, Tier::UAV); });
  SdpReport tu = tier_sdp(ctx, tu_model, Tier::TU);
  return {std::move(tu), uav.get()};
}

}  // namespace detail

// Combined average weighted by the TU/UAV population shares, with per-tier reports.
inline SdpReport average_sdp(const TierContext& ctx, const PathLossModel& tu_model, const PathLossModel& uav_model) {
  validate(ctx);
  auto [tu, uav] = detail::both_tiers(ctx, tu_model, uav_model);
  const double tu_err = tu.abs_error, uav_err = uav.abs_error;
  SdpReport rep = detail::combine(ctx, std::move(tu), std::move(uav), ctx.catalog.pmf, ctx.catalog.pmf);
  rep.tiers[0].abs_error = tu_err;
  rep.tiers[1].abs_error = uav_err;
  const double wt = ctx.cfg.tu_density / ctx.cfg.ue_density();
  rep.abs_error = wt * tu_err + (1.0 - wt) * uav_err;
  return rep;
}

// Tier-specific request pmfs. Tier densities are thinned with the population-weighted pmf.
inline SdpReport average_sdp_split(const TierContext& ctx, const PathLossModel& tu_model,
                                   const PathLossModel& uav_model, const std::vector<double>& q_tu,
                                   const std::vector<double>& q_uav) {
  const std::size_t n = ctx.cache.size();
  if (q_tu.size() != n || q_uav.size() != n) throw ValidationError("tier pmf length does not match the catalog");
  validate_pmf(q_tu, "TU request pmf");
  validate_pmf(q_uav, "UAV request pmf");
  TierContext mixed = ctx;
  const double wt = ctx.cfg.tu_density / ctx.cfg.ue_density();
  const double wa = ctx.cfg.au_density / ctx.cfg.ue_density();
  for (std::size_t i = 0; i < n; ++i) mixed.catalog.pmf[i] = wt * q_tu[i] + wa * q_uav[i];
  validate(mixed);
  auto [tu, uav] = detail::both_tiers(mixed, tu_model, uav_model);
  const double err = wt * tu.abs_error + wa * uav.abs_error;
  SdpReport rep = detail::combine(mixed, std::move(tu), std::move(uav), q_tu, q_uav);
  rep.abs_error = err;
  return rep;
}

}  // namespace cachesdp
