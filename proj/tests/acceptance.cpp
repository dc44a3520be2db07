// Acceptance run: one PASS/FAIL line per criterion, indented detail lines below it.
// Always exits 0; the verdicts are in the output.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "cachesdp/cachesdp.hpp"

using namespace cachesdp;

namespace {

using clock_type = std::chrono::steady_clock;

NetworkConfig at_density(double per_km2) {
  NetworkConfig cfg = default_config();
  cfg.sbs_density = units::per_km2(per_km2);
  return cfg;
}

struct Detail {
  std::vector<std::string> lines;
  __attribute__((format(printf, 2, 3))) void add(const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    lines.emplace_back(buf);
  }
};

int n_pass = 0, n_fail = 0;

void verdict(int id, const char* title, bool ok, const Detail& d) {
  std::printf("%s [%d] %s\n", ok ? "PASS" : "FAIL", id, title);
  for (const auto& l : d.lines) std::printf("    %s\n", l.c_str());
  std::fflush(stdout);
  (ok ? n_pass : n_fail)++;
}

SdpReport theorem1(const NetworkConfig& cfg, const ZipfCatalog& cat, const CacheVector& cache) {
  TierContext ctx{cat, cache, cfg, ActiveMode::Exact, {}};
  return average_sdp(ctx, make_tu_model(cfg), make_uav_model(cfg));
}

void criterion1() {
  Detail d;
  const auto t0 = clock_type::now();
  const auto cat = zipf_pmf(100, 1.0);
  const std::size_t trials = 10000;
  bool ok = true;
  for (double ls : {1e3, 1e4, 1e5}) {
    const auto cfg = at_density(ls);
    const auto tu = make_tu_model(cfg), uav = make_uav_model(cfg);
    for (const auto& [name, cache] : {std::pair{"UCS", ucs_vector(100, 10)}, std::pair{"PCS", pcs_vector(100, 10)}}) {
      const auto a = theorem1(cfg, cat, cache);
      const auto mc = sim::estimate_sdp(cfg, cat, cache, tu, uav, trials, 20240601);
      const struct {
        const char* tier;
        double an, mc, se;
      } rows[] = {{"tu", a.tiers[0].average, mc.tu.mean, mc.tu.stderr},
                  {"uav", a.tiers[1].average, mc.uav.mean, mc.uav.stderr},
                  {"avg", a.average, mc.average, mc.stderr}};
      for (const auto& r : rows) {
        const double tol = 2 * (r.se + 1e-3);
        const bool good = std::abs(r.an - r.mc) <= tol;
        ok = ok && good;
        d.add("lambda_s=%-6g %s %-3s analysis=%.4f mc=%.4f |diff|=%.4f tol=%.4f %s", ls, name, r.tier, r.an, r.mc,
              std::abs(r.an - r.mc), tol, good ? "ok" : "MISS");
      }
    }
  }
  const double secs = std::chrono::duration<double>(clock_type::now() - t0).count();
  d.add("trials=%zu per point, runtime %.1f s (target < 600 s)", trials, secs);
  verdict(1, "analysis vs Monte Carlo at lambda_s in {1e3,1e4,1e5}, UCS/PCS", ok && secs < 600, d);
}

void criterion2() {
  Detail d;
  bool ok = true;
  double worst = std::numeric_limits<double>::infinity();
  for (double ls : {1e3, 1e4, 1e5}) {
    const auto cfg = at_density(ls);
    const auto tu = make_tu_model(cfg), uav = make_uav_model(cfg);
    for (double beta : {0.4, 1.0, 1.6}) {
      const DenseObjective env(zipf_pmf(100, beta), cfg, tu, uav);
      for (std::size_t m : {5, 10, 15}) {
        const double o = env.evaluate(optimize_caching(env, m)).average;
        const double u = env.evaluate(ucs_vector(100, m)).average;
        const double p = env.evaluate(pcs_vector(100, m)).average;
        const double margin = o - std::max(u, p);
        worst = std::min(worst, margin);
        if (margin < -1e-6) {
          ok = false;
          d.add("violation lambda_s=%g beta=%g M=%zu OCS=%.6f UCS=%.6f PCS=%.6f", ls, beta, m, o, u, p);
        }
      }
    }
  }
  d.add("27 grid points, smallest OCS - max(UCS,PCS) = %.3e", worst);
  verdict(2, "OCS dominance on the (lambda_s, beta, M) grid", ok, d);
}

void criterion3() {
  Detail d;
  const auto cat = zipf_pmf(100, 1.0);
  auto gap = [&](double ls, int tier) {
    const auto cfg = at_density(ls);
    const auto p = theorem1(cfg, cat, pcs_vector(100, 10));
    const auto u = theorem1(cfg, cat, ucs_vector(100, 10));
    return p.tiers[tier].average - u.tiers[tier].average;
  };
  const double g3 = gap(1e3, 0), g5 = gap(1e5, 0);
  d.add("TU PCS-UCS at 1e3: %+.4f (want > 0), at 1e5: %+.4f (want < 0)", g3, g5);
  bool ok = g3 > 0 && g5 < 0;
  double lo = 5e3, hi = 5e4;
  const double glo = gap(lo, 1), ghi = gap(hi, 1);
  d.add("UAV PCS-UCS at 5e3: %+.4f, at 5e4: %+.4f", glo, ghi);
  if (glo > 0 && ghi < 0) {
    for (int i = 0; i < 40; ++i) {
      const double mid = std::sqrt(lo * hi);
      (gap(mid, 1) > 0 ? lo : hi) = mid;
    }
    d.add("UAV crossover at lambda_s = %.4g /km^2 (bracket [5e3, 5e4])", std::sqrt(lo * hi));
    // TU crossover for reference
    double a = 1e3, b = 1e5;
    for (int i = 0; i < 40; ++i) {
      const double mid = std::sqrt(a * b);
      (gap(mid, 0) > 0 ? a : b) = mid;
    }
    d.add("TU crossover at lambda_s = %.4g /km^2", std::sqrt(a * b));
  } else {
    ok = false;
    d.add("no sign change of the UAV gap inside [5e3, 5e4]");
  }
  verdict(3, "PCS/UCS crossover ordering and UAV crossover bracket", ok, d);
}

void criterion4() {
  Detail d;
  const auto cfg = at_density(1e5);
  const auto cat = zipf_pmf(100, 1.0);
  bool ok = true;
  const struct {
    std::size_t m;
    double tu, uav;
  } cases[] = {{5, 0.42, 0.37}, {15, 0.61, 0.50}};
  for (const auto& c : cases) {
    const auto r = theorem1(cfg, cat, pcs_vector(100, c.m));
    const bool gt = std::abs(r.tiers[0].average - c.tu) <= 0.05;
    const bool ga = std::abs(r.tiers[1].average - c.uav) <= 0.05;
    ok = ok && gt && ga;
    d.add("M=%-2zu TU PCS=%.4f (target %.2f +-0.05) %s, UAV PCS=%.4f (target %.2f +-0.05) %s", c.m,
          r.tiers[0].average, c.tu, gt ? "ok" : "MISS", r.tiers[1].average, c.uav, ga ? "ok" : "MISS");
  }
  verdict(4, "PCS saturation values at lambda_s = 1e5", ok, d);
}

void criterion5() {
  Detail d;
  const auto cat = zipf_pmf(100, 1.0);
  const double heights[] = {30.0, 100.0, 300.0};
  bool ok = true;
  // OCS re-optimized at each height for the UAV curve; its h=30 vector is held for the TU check.
  CacheVector ocs30;
  for (const char* name : {"UCS", "PCS", "OCS"}) {
    std::vector<double> uav_v, tu_v;
    for (double h : heights) {
      auto cfg = at_density(1e4);
      cfg.uav_height = h;
      CacheVector cache = std::string(name) == "UCS" ? ucs_vector(100, 10) : pcs_vector(100, 10);
      if (std::string(name) == "OCS") {
        cache = optimize_caching(cat, 10, cfg, make_tu_model(cfg), make_uav_model(cfg));
        if (h == heights[0]) ocs30 = cache;
      }
      uav_v.push_back(theorem1(cfg, cat, cache).tiers[1].average);
      const CacheVector& fixed = std::string(name) == "OCS" ? ocs30 : cache;
      TierContext ctx{cat, fixed, cfg, ActiveMode::Exact, {}};
      tu_v.push_back(tier_sdp(ctx, make_tu_model(cfg), Tier::TU).average);
    }
    const bool dec = uav_v[0] > uav_v[1] && uav_v[1] > uav_v[2];
    const double spread = std::max({std::abs(tu_v[0] - tu_v[1]), std::abs(tu_v[0] - tu_v[2])});
    ok = ok && dec && spread <= 1e-10;
    d.add("%s UAV %.4f > %.4f > %.4f %s; TU spread %.1e %s", name, uav_v[0], uav_v[1], uav_v[2], dec ? "ok" : "MISS",
          spread, spread <= 1e-10 ? "ok" : "MISS");
  }
  verdict(5, "UAV SDP decreases with h_AU in {30,100,300} m, TU unchanged", ok, d);
}

void criterion6() {
  Detail d;
  const auto cat = zipf_pmf(100, 1.0);
  bool ok = true;
  {
    const auto cfg = at_density(1e8);
    for (double h : {cfg.tu_height_diff(), cfg.uav_height_diff()}) {
      const SingleSlopeModel m{4.0, h};
      const auto lim = limit_dense(cat, 10, cfg, m);
      const double p = avg_sdp_single_slope(cat, pcs_vector(100, 10), cfg, m);
      const double u = avg_sdp_single_slope(cat, ucs_vector(100, 10), cfg, m);
      const bool good = std::abs(p - lim.pcs) <= 1e-3 && std::abs(u - lim.ucs) <= 1e-3;
      ok = ok && good;
      d.add("(a) h=%.1f lambda_s=1e8: PCS %.6f vs limit %.6f, UCS %.6f vs limit %.6f %s", h, p, lim.pcs, u, lim.ucs,
            good ? "ok" : "MISS");
    }
  }
  {
    const auto cfg = at_density(1e5);
    const SingleSlopeModel m{4.0, cfg.tu_height_diff()};
    for (const auto& [name, cache] : {std::pair{"PCS", pcs_vector(100, 10)}, std::pair{"UCS", ucs_vector(100, 10)}}) {
      const double closed = avg_sdp_single_slope(cat, cache, cfg, m);
      const double direct = avg_sdp_single_slope_quadrature(cat, cache, cfg, m);
      const bool good = std::abs(closed - direct) <= 1e-4;
      ok = ok && good;
      d.add("(b) %s lambda_s=1e5 alpha=4: closed form %.6f, direct quadrature %.6f, diff %+.2e (tol 1e-4) %s", name,
            closed, direct, closed - direct, good ? "ok" : "MISS");
    }
  }
  verdict(6, "single-slope closed forms vs limits and direct quadrature", ok, d);
}

// Compact versions of the unit-test properties.
void criterion7() {
  Detail d;
  bool ok = true;
  auto check = [&](const char* what, bool good, const std::string& info) {
    ok = ok && good;
    d.add("%-34s %s %s", what, good ? "ok  " : "MISS", info.c_str());
  };
  auto str = [](const char* fmt, double a, double b = 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return std::string(buf);
  };
  const auto cfg = default_config();
  const auto tu = make_tu_model(cfg), uav = make_uav_model(cfg);

  {
    double worst = 0.0;
    for (const PathLossModel* m : {&tu, &uav}) {
      for (double rho : {1e-5, 1e-4, 1e-3}) {
        double total = 0.0;
        for (std::size_t k = 0; k < m->size(); ++k) {
          const auto& s = m->segments()[k];
          auto f = [&](double r) { return assoc_pdf_los(*m, rho, r, k) + assoc_pdf_nlos(*m, rho, r, k); };
          total += std::isinf(s.r_hi) ? quad::integrate_to_infinity(f, s.r_lo, 1.0 / std::sqrt(rho)).value
                                      : quad::integrate(f, std::max(s.r_lo, 1e-12), s.r_hi).value;
        }
        worst = std::max(worst, std::abs(total - 1.0));
      }
    }
    check("association pdf normalization", worst <= 1e-6, str("max |mass-1| = %.1e", worst));
  }
  {
    bool good = true;
    const TierContext ctx{zipf_pmf(100, 1.0), pcs_vector(100, 10), cfg};
    for (double r : {5.0, 40.0, 200.0, 500.0}) {
      const double v = laplace_interference(ctx, tu, 3, tu.gain(LinkState::Nlos, r), r, LinkState::Nlos);
      good = good && v > 0 && v <= 1;
    }
    double prev = 1.0;
    for (double db : {-20.0, -10.0, -6.0, 0.0, 10.0}) {
      TierContext c = ctx;
      c.cfg.sinr_threshold = units::db_to_linear(db);
      const double v = laplace_interference(c, uav, 2, uav.gain(LinkState::Los, 35.0), 35.0, LinkState::Los);
      good = good && v <= prev;
      prev = v;
    }
    prev = 1.0;
    for (double load : {10.0, 300.0, 5000.0}) {
      TierContext c = ctx;
      c.cfg.tu_density = c.cfg.au_density = units::per_km2(load / 2);
      const double v = laplace_interference(c, uav, 2, uav.gain(LinkState::Los, 35.0), 35.0, LinkState::Los);
      good = good && v <= prev;
      prev = v;
    }
    check("Laplace bounds and monotonicity", good, "in (0,1], non-increasing in delta and load");
  }
  {
    const auto c4 = at_density(1e4);
    const DenseObjective env(zipf_pmf(50, 0.8), c4, make_tu_model(c4), make_uav_model(c4));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> us(0.01, 0.99), ug(-0.5, 0.0);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double s = us(rng), g = ug(rng);
      const std::size_t n = rng() % 50;
      const double h = 1e-5;
      const double fd = (lagrangian_n(s + h, g, n, env) - lagrangian_n(s - h, g, n, env)) / (2 * h);
      worst = std::max(worst, std::abs(dlagrangian_n(s, g, n, env) - fd) / std::max(std::abs(fd), 1e-3));
    }
    check("Lagrangian gradient vs central FD", worst <= 1e-5, str("max rel err %.1e at 20 points", worst));
  }
  {
    double worst = 0.0;
    for (double x : {0.01, 0.5, 2.0, 50.0, 1e5}) worst = std::max(worst, std::abs(hyp2f1_1b(1.0, 2.0, -x) - std::log1p(x) / x));
    for (double x : {0.01, 0.9, 3.0, 1e6}) worst = std::max(worst, std::abs(hyp2f1_1b(0.5, 1.5, -x) - std::atan(std::sqrt(x)) / std::sqrt(x)));
    check("2F1 log/arctan identities", worst <= 1e-10, str("max err %.1e", worst));
  }
  {
    const double density = 2e-4, half = 500.0;
    const int draws = 1000;
    std::vector<double> counts;
    for (int i = 0; i < draws; ++i) {
      sim::CounterRng rng(sim::hash(77, i));
      counts.push_back(static_cast<double>(sim::sample_hppp(density, half, rng).size()));
    }
    double m = 0.0;
    for (double c : counts) m += c;
    m /= draws;
    double disp = 0.0;
    for (double c : counts) disp += (c - m) * (c - m) / m;
    const boost::math::chi_squared chi(draws - 1);
    const bool good = disp > boost::math::quantile(chi, 0.005) && disp < boost::math::quantile(chi, 0.995);
    check("PPP count dispersion (chi^2, 1%)", good, str("mean %.2f (expect 200), dispersion %.1f", m, disp));
  }
  for (const PathLossModel* m : {&tu, &uav}) {
    const double rho = 1e-4;
    const std::size_t n = 100000;
    const auto samples = sim::sample_association(*m, rho, n, 2024);
    std::vector<double> xs;
    for (const auto& s : samples) xs.push_back(s.r);
    std::sort(xs.begin(), xs.end());
    auto pdf = [&](double x) {
      const std::size_t k = m->segment_index(x);
      return assoc_pdf_los(*m, rho, x, k) + assoc_pdf_nlos(*m, rho, x, k);
    };
    // CDF tabulated on a 0.5 m grid split at the segment breakpoints, interpolated linearly
    std::vector<double> rr{0.0}, ff{0.0};
    const auto bps = m->breakpoints();
    for (double a = 0.0; a < 1200.0;) {
      double b = std::min(a + 0.5, 1200.0);
      for (double bp : bps)
        if (bp > a && bp < b) b = bp;
      rr.push_back(b);
      ff.push_back(ff.back() + quad::integrate(pdf, a, b).value);
      a = b;
    }
    auto cdf = [&](double x) {
      const auto it = std::upper_bound(rr.begin(), rr.end(), x);
      if (it == rr.end()) return ff.back();
      const std::size_t i = static_cast<std::size_t>(it - rr.begin());
      return ff[i - 1] + (x - rr[i - 1]) / (rr[i] - rr[i - 1]) * (ff[i] - ff[i - 1]);
    };
    double dstat = 0.0;
    const double cnt = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double f = cdf(xs[i]);
      dstat = std::max({dstat, (i + 1) / cnt - f, f - i / cnt});
    }
    const double crit = 1.628 / std::sqrt(cnt);
    check(m == &tu ? "KS serving distance TU (1%)" : "KS serving distance UAV (1%)", dstat < crit,
          str("D = %.5f, critical %.5f", dstat, crit));
  }
  {
    std::istringstream in(R"([catalog]
file_count = 20
cache_size = 4
[sweep]
variable = sbs_density_per_km2
values = 1e3, 1e4
[engines]
engines = analysis, montecarlo
strategies = UCS, PCS, OCS
trials = 50
seed = 5
)");
    const auto spec = parse_spec(in, "det");
    std::ostringstream a, b;
    write_csv(run_experiment(spec), a);
    auto single = spec;
    single.workers = 1;
    write_csv(run_experiment(single), b);
    check("same seed gives byte-identical CSV", a.str() == b.str() && !a.str().empty(),
          str("%.0f bytes, pooled vs single worker", static_cast<double>(a.str().size())));
  }
  verdict(7, "property suite", ok, d);
}

}  // namespace

int main() {
  const auto t0 = clock_type::now();
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  std::printf("summary: %d PASS, %d FAIL, %.0f s\n", n_pass, n_fail,
              std::chrono::duration<double>(clock_type::now() - t0).count());
  return 0;
}
