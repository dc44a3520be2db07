#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cachesdp/analysis.hpp"
#include "cachesdp/catalog.hpp"
#include "cachesdp/channel.hpp"
#include "cachesdp/config.hpp"
#include "cachesdp/error.hpp"
#include "cachesdp/quadrature.hpp"

namespace cachesdp {
namespace sim {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v + kGolden)); }

template <class... Ts>
std::uint64_t hash(std::uint64_t h, std::uint64_t v, Ts... rest) {
  return hash(hash(h, v), static_cast<std::uint64_t>(rest)...);
}

// Uniform on the open interval (0, 1).
inline double to_unit(std::uint64_t h) { return (static_cast<double>(h >> 11) + 0.5) * 0x1p-53; }

// Counter-based generator: output i is mix64(key + i * golden). Any key gives an
// independent substream, so trials and cells can be generated in any order.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  explicit CounterRng(std::uint64_t key) : state_(key) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    state_ += kGolden;
    return mix64(state_);
  }
  double uniform() { return to_unit((*this)()); }

 private:
  std::uint64_t state_;
};

struct Point2 {
  double x = 0.0, y = 0.0;
};

// Homogeneous PPP on the square [-R, R]^2.
inline std::vector<Point2> sample_hppp(double density, double half_width, CounterRng& rng) {
  if (!(density >= 0)) throw ValidationError("density must be >= 0");
  if (!(half_width > 0)) throw ValidationError("region half-width must be > 0");
  std::vector<Point2> pts;
  if (density == 0.0) return pts;
  const double mean = density * 4.0 * half_width * half_width;
  const auto count = std::poisson_distribution<long long>(mean)(rng);
  pts.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    const double x = (2.0 * rng.uniform() - 1.0) * half_width;
    const double y = (2.0 * rng.uniform() - 1.0) * half_width;
    pts.push_back({x, y});
  }
  return pts;
}

struct SimOptions {
  double region_half_width = 0.0;  // m; SBS square. <= 0: from the sparsest caching tier
  double active_half_width = 0.0;  // m; zone with simulated on-off. <= 0: automatic
  double ue_guard = 150.0;         // m; UEs are dropped this far beyond the active zone
  double cell_occupancy = 4.0;     // mean SBSs per lazily generated cell
  unsigned threads = 0;            // 0: hardware concurrency
};

struct SimGeometry {
  double region = 0.0;  // SBS square half-width
  double active = 0.0;  // structural on-off square half-width
  double ue = 0.0;      // UE drop square half-width
};

// Largest gain any state can reach at horizontal distance >= d.
inline double max_gain_beyond(const PathLossModel& m, double d) {
  double best = 0.0;
  for (const auto& s : m.segments()) {
    if (s.r_hi <= d) continue;
    const double l = m.distance(std::max(d, s.r_lo));
    if (s.regime != LosRegime::NeverLos) best = std::max(best, s.gain(LinkState::Los, l));
    if (s.regime != LosRegime::AlwaysLos) best = std::max(best, s.gain(LinkState::Nlos, l));
  }
  return best;
}

struct Sbs {
  double x = 0.0, y = 0.0;
  std::uint64_t id = 0;
};

struct Server {
  bool found = false;
  Sbs sbs;
  double r = 0.0;
  double gain = 0.0;
  LinkState state = LinkState::Nlos;
};

namespace tag {
inline constexpr std::uint64_t kCell = 1, kCache = 2, kLos = 3, kFade = 4, kTu = 5, kUav = 6, kRequest = 7,
                               kFar = 8, kTypical = 9;
}

// Everything shared by the trials of one estimate.
class SimSetup {
 public:
  SimSetup(const NetworkConfig& cfg, const ZipfCatalog& catalog, const CacheVector& cache,
           const PathLossModel& tu_model, const PathLossModel& uav_model, const SimOptions& opt = {})
      : cfg_(cfg), q_(catalog.pmf), s_(cache.probs), tu_(tu_model), uav_(uav_model), opt_(opt) {
    validate(cfg_);
    validate_pmf(q_, "request pmf");
    validate(cache, 1e-6);
    if (s_.size() != q_.size()) throw ValidationError("cache vector and catalog differ in length");
    if (!(opt_.cell_occupancy > 0)) throw ValidationError("cell occupancy must be > 0");
    if (!(opt_.ue_guard >= 0)) throw ValidationError("UE guard must be >= 0");
    cdf_.resize(q_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) cdf_[i] = acc += q_[i];
    cdf_.back() = 1.0;

    double rho_min = std::numeric_limits<double>::infinity();
    for (double s : s_)
      if (s > 0) rho_min = std::min(rho_min, s * cfg_.sbs_density);
    const double scale = 3.0 / std::sqrt(std::numbers::pi * rho_min);
    geo_.region = opt_.region_half_width > 0 ? opt_.region_half_width : std::clamp(scale + 1000.0, 2000.0, 5000.0);
    geo_.active = opt_.active_half_width > 0 ? std::min(opt_.active_half_width, geo_.region)
                                             : std::min(geo_.region, std::clamp(scale, 400.0, 1000.0));
    geo_.ue = std::min(geo_.region, geo_.active + opt_.ue_guard);
    cell_ = std::sqrt(opt_.cell_occupancy / cfg_.sbs_density);
    cell_lo_ = static_cast<long long>(std::floor(-geo_.region / cell_));
    cell_hi_ = static_cast<long long>(std::floor(geo_.region / cell_));

    // Outside the active zone an SBS transmits with the on-probability mixed over its cache.
    const auto w = active_densities(catalog, cache, cfg_, ActiveMode::Exact);
    double log_idle = 0.0;
    for (std::size_t i = 0; i < s_.size(); ++i) {
      if (!(s_[i] > 0)) continue;
      log_idle += std::log1p(-w[i] / cfg_.sbs_density);
    }
    far_density_ = -std::expm1(log_idle) * cfg_.sbs_density;
  }

  const NetworkConfig& config() const { return cfg_; }
  const std::vector<double>& pmf() const { return q_; }
  const std::vector<double>& cache() const { return s_; }
  const PathLossModel& tu_model() const { return tu_; }
  const PathLossModel& uav_model() const { return uav_; }
  const SimGeometry& geometry() const { return geo_; }
  const SimOptions& options() const { return opt_; }
  double cell_size() const { return cell_; }
  double far_density() const { return far_density_; }
  long long cell_lo() const { return cell_lo_; }
  long long cell_hi() const { return cell_hi_; }

  std::size_t request(double u) const {
    return static_cast<std::size_t>(std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
  }

 private:
  NetworkConfig cfg_;
  std::vector<double> q_, cdf_, s_;
  PathLossModel tu_, uav_;
  SimOptions opt_;
  SimGeometry geo_;
  double cell_ = 0.0;
  long long cell_lo_ = 0, cell_hi_ = 0;
  double far_density_ = 0.0;
};

// One network realization. SBS cells, cache contents, link states and fading are pure
// functions of (seed, trial, ids); cells are generated on first use.
class NetworkDrop {
 public:
  NetworkDrop(const SimSetup& setup, std::uint64_t seed, std::uint64_t trial)
      : setup_(setup), key_(hash(seed, trial)), seed_(seed) {}

  const SimSetup& setup() const { return setup_; }
  std::uint64_t seed() const { return seed_; }

  const std::vector<Sbs>& cell(long long ix, long long iy) {
    const std::uint64_t ck = (static_cast<std::uint64_t>(ix) << 32) ^ static_cast<std::uint64_t>(iy & 0xffffffffLL);
    auto it = cells_.find(ck);
    if (it != cells_.end()) return it->second;
    std::vector<Sbs> v;
    if (ix >= setup_.cell_lo() && ix <= setup_.cell_hi() && iy >= setup_.cell_lo() && iy <= setup_.cell_hi()) {
      CounterRng rng(hash(key_, tag::kCell, ck));
      const double c = setup_.cell_size();
      const double mean = setup_.config().sbs_density * c * c;
      const auto count = std::poisson_distribution<int>(mean)(rng);
      if (count > 255) throw NumericalError("cell occupancy overflow", count, 0.0, 0);
      const double r = setup_.geometry().region;
      for (int k = 0; k < count; ++k) {
        const double x = (static_cast<double>(ix) + rng.uniform()) * c;
        const double y = (static_cast<double>(iy) + rng.uniform()) * c;
        if (std::abs(x) <= r && std::abs(y) <= r) v.push_back({x, y, ck << 8 | static_cast<std::uint64_t>(k)});
      }
    }
    return cells_.emplace(ck, std::move(v)).first->second;
  }

  bool caches(const Sbs& b, std::size_t file) const {
    const double s = setup_.cache()[file];
    if (s >= 1.0) return true;
    if (!(s > 0.0)) return false;
    return to_unit(hash(key_, tag::kCache, b.id, file)) < s;
  }

  // The propagation state belongs to the link and is reused within the trial.
  LinkState link_state(std::uint64_t link, std::uint64_t sbs, const PathLossModel& m, double r) const {
    return to_unit(hash(key_, tag::kLos, link, sbs)) < m.los_prob(r) ? LinkState::Los : LinkState::Nlos;
  }

  double fading(std::uint64_t link, std::uint64_t sbs) const {
    return -std::log(to_unit(hash(key_, tag::kFade, link, sbs)));
  }

  // Best realized path gain among SBSs caching `file`, searched ring by ring around p.
  Server best_server(Point2 p, std::uint64_t link, std::size_t file, const PathLossModel& m) {
    Server best;
    if (!(setup_.cache()[file] > 0)) return best;
    const double c = setup_.cell_size();
    const auto cx = static_cast<long long>(std::floor(p.x / c));
    const auto cy = static_cast<long long>(std::floor(p.y / c));
    const long long lo = setup_.cell_lo(), hi = setup_.cell_hi();
    auto visit = [&](long long ix, long long iy) {
      if (ix < lo || ix > hi || iy < lo || iy > hi) return;
      for (const auto& b : cell(ix, iy)) {
        if (!caches(b, file)) continue;
        const double r = std::hypot(b.x - p.x, b.y - p.y);
        const LinkState st = link_state(link, b.id, m, r);
        const double g = m.gain(st, r);
        if (g > best.gain) best = {true, b, r, g, st};
      }
    };
    for (long long k = 0;; ++k) {
      if (cx - k < lo && cx + k > hi && cy - k < lo && cy + k > hi) break;
      if (best.found && k >= 2 && max_gain_beyond(m, static_cast<double>(k - 1) * c) < best.gain) break;
      if (k == 0) {
        visit(cx, cy);
        continue;
      }
      for (long long i = -k; i <= k; ++i) {
        visit(cx + i, cy - k);
        visit(cx + i, cy + k);
      }
      for (long long j = -k + 1; j <= k - 1; ++j) {
        visit(cx - k, cy + j);
        visit(cx + k, cy + j);
      }
    }
    return best;
  }

  std::vector<Point2> users(std::uint64_t population, double density) const {
    CounterRng rng(hash(key_, population));
    return sample_hppp(density, setup_.geometry().ue, rng);
  }

  std::size_t request(std::uint64_t population, std::size_t k) const {
    return setup_.request(to_unit(hash(key_, tag::kRequest, population, k)));
  }

  // SBSs inside the active zone serving at least one dropped UE. With file_filter set,
  // only associations for that file count.
  std::vector<Sbs> active_sbs(std::size_t file_filter = std::numeric_limits<std::size_t>::max()) {
    std::unordered_set<std::uint64_t> seen;
    std::vector<Sbs> out;
    const double a = setup_.geometry().active;
    const NetworkConfig& cfg = setup_.config();
    const std::pair<std::uint64_t, double> pops[] = {{tag::kTu, cfg.tu_density}, {tag::kUav, cfg.au_density}};
    for (const auto& [pop, density] : pops) {
      const PathLossModel& m = pop == tag::kTu ? setup_.tu_model() : setup_.uav_model();
      const auto ues = users(pop, density);
      for (std::size_t k = 0; k < ues.size(); ++k) {
        const std::size_t f = request(pop, k);
        if (file_filter != std::numeric_limits<std::size_t>::max() && f != file_filter) continue;
        const Server s = best_server(ues[k], hash(pop, k), f, m);
        if (!s.found || std::abs(s.sbs.x) > a || std::abs(s.sbs.y) > a) continue;
        if (seen.insert(s.sbs.id).second) out.push_back(s.sbs);
      }
    }
    return out;
  }

  // Transmitting SBSs between the active zone and the region edge, thinned independently.
  std::vector<Sbs> far_interferers() const {
    CounterRng rng(hash(key_, tag::kFar));
    const double a = setup_.geometry().active;
    std::vector<Sbs> out;
    if (!(a < setup_.geometry().region)) return out;
    const auto pts = sample_hppp(setup_.far_density(), setup_.geometry().region, rng);
    std::uint64_t k = 0;
    for (const auto& p : pts) {
      ++k;
      if (std::abs(p.x) <= a && std::abs(p.y) <= a) continue;
      out.push_back({p.x, p.y, (1ULL << 63) | k});
    }
    return out;
  }

  // Every SBS inside the square of half-width h (for diagnostics).
  std::vector<Sbs> sbs_in_square(double h) {
    std::vector<Sbs> out;
    const double c = setup_.cell_size();
    const auto lo = static_cast<long long>(std::floor(-h / c)), hi = static_cast<long long>(std::floor(h / c));
    for (long long ix = lo; ix <= hi; ++ix)
      for (long long iy = lo; iy <= hi; ++iy)
        for (const auto& b : cell(ix, iy))
          if (std::abs(b.x) <= h && std::abs(b.y) <= h) out.push_back(b);
    return out;
  }

 private:
  const SimSetup& setup_;
  std::uint64_t key_;
  std::uint64_t seed_;
  std::unordered_map<std::uint64_t, std::vector<Sbs>> cells_;
};

struct TrialResult {
  std::vector<std::uint8_t> tu, uav;  // success per file for the typical TU / UAV
  std::size_t active = 0;              // SBSs switched on inside the active zone
};

// Typical TU and typical UAV at the origin, each requesting every file in turn.
inline TrialResult run_trial(const SimSetup& setup, std::uint64_t seed, std::uint64_t trial) {
  NetworkDrop drop(setup, seed, trial);
  const NetworkConfig& cfg = setup.config();
  const std::size_t n_files = setup.pmf().size();
  TrialResult res;
  res.tu.assign(n_files, 0);
  res.uav.assign(n_files, 0);
  std::vector<Sbs> inter = drop.active_sbs();
  res.active = inter.size();
  std::unordered_set<std::uint64_t> on;
  for (const auto& b : inter) on.insert(b.id);
  const auto far = drop.far_interferers();
  inter.insert(inter.end(), far.begin(), far.end());

  for (int t = 0; t < 2; ++t) {
    const double density = t == 0 ? cfg.tu_density : cfg.au_density;
    if (!(density > 0)) continue;
    const PathLossModel& m = t == 0 ? setup.tu_model() : setup.uav_model();
    const std::uint64_t link = hash(tag::kTypical, static_cast<std::uint64_t>(t));
    auto& out = t == 0 ? res.tu : res.uav;
    double total = 0.0;
    for (const auto& b : inter) {
      const double r = std::hypot(b.x, b.y);
      total += drop.fading(link, b.id) * m.gain(drop.link_state(link, b.id, m, r), r);
    }
    for (std::size_t n = 0; n < n_files; ++n) {
      const Server s = drop.best_server({0.0, 0.0}, link, n, m);
      if (!s.found) continue;
      const double own = drop.fading(link, s.sbs.id) * s.gain;
      const double interference = std::max(0.0, on.count(s.sbs.id) ? total - own : total);
      out[n] = cfg.tx_power * own >= cfg.sinr_threshold * (cfg.noise_power + cfg.tx_power * interference);
    }
  }
  return res;
}

struct TierEstimate {
  std::vector<double> per_file;         // empirical SDP per file
  std::vector<double> per_file_stderr;  // sqrt(p(1-p)/trials)
  double mean = 0.0;                    // request-weighted average
  double stderr = 0.0;                  // sqrt(p(1-p)/trials)
  double sample_stderr = 0.0;           // from the per-trial averages
  double truncation_bound = 0.0;        // bound on the SDP lost by ignoring interferers beyond the region
};

struct SimEstimate {
  TierEstimate tu, uav;
  double average = 0.0;
  double stderr = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  SimGeometry geometry;
  double mean_active_density = 0.0;  // per m^2 inside the active zone
};

// Mean far-field interference beyond the region relative to a weak serving link
// (NLoS at the median nearest distance of the sparsest caching tier).
inline double truncation_bound(const SimSetup& setup, const PathLossModel& m) {
  const NetworkConfig& cfg = setup.config();
  const double lam = setup.far_density();
  if (lam == 0.0) return 0.0;
  double rho_min = std::numeric_limits<double>::infinity();
  for (double s : setup.cache())
    if (s > 0) rho_min = std::min(rho_min, s * cfg.sbs_density);
  const double r_ref = std::sqrt(std::log(2.0) / (std::numbers::pi * rho_min));
  const double g_ref = std::min(m.gain(LinkState::Los, r_ref), m.gain(LinkState::Nlos, r_ref));
  const double r0 = setup.geometry().region;
  auto mean_gain = [&](double r) {
    const double p = m.los_prob(r);
    return r * (p * m.gain(LinkState::Los, r) + (1.0 - p) * m.gain(LinkState::Nlos, r));
  };
  quad::Options o;
  o.rel_tol = 1e-6;
  o.tail_rel_tol = 1e-6;
  o.max_tail_pieces = 400;
  const auto tail = quad::integrate_to_infinity(mean_gain, r0, r0, o);
  return std::min(1.0, cfg.sinr_threshold * 2.0 * std::numbers::pi * lam * tail.value / g_ref);
}

inline SimEstimate estimate_sdp(const SimSetup& setup, std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("trials must be >= 1");
  const std::size_t n_files = setup.pmf().size();
  const auto& q = setup.pmf();
  unsigned workers = setup.options().threads ? setup.options().threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, trials));

  struct Chunk {
    std::vector<long long> tu, uav;
    long long active = 0;
  };
  std::vector<double> avg_tu(trials), avg_uav(trials);
  auto work = [&](std::size_t begin, std::size_t end) {
    Chunk c;
    c.tu.assign(n_files, 0);
    c.uav.assign(n_files, 0);
    for (std::size_t t = begin; t < end; ++t) {
      const TrialResult r = run_trial(setup, seed, t);
      double a = 0.0, b = 0.0;
      for (std::size_t n = 0; n < n_files; ++n) {
        c.tu[n] += r.tu[n];
        c.uav[n] += r.uav[n];
        a += q[n] * r.tu[n];
        b += q[n] * r.uav[n];
      }
      avg_tu[t] = a;
      avg_uav[t] = b;
      c.active += static_cast<long long>(r.active);
    }
    return c;
  };
  std::vector<std::future<Chunk>> jobs;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t b = trials * w / workers, e = trials * (w + 1) / workers;
    jobs.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, work, b, e));
  }
  // Integer counts make the reduction exact in any order.
  std::vector<long long> cnt_tu(n_files, 0), cnt_uav(n_files, 0);
  long long active = 0;
  for (auto& j : jobs) {
    const Chunk c = j.get();
    for (std::size_t n = 0; n < n_files; ++n) {
      cnt_tu[n] += c.tu[n];
      cnt_uav[n] += c.uav[n];
    }
    active += c.active;
  }

  const double nt = static_cast<double>(trials);
  auto bern = [&](double p) { return std::sqrt(std::max(0.0, p * (1.0 - p)) / nt); };
  auto fill = [&](TierEstimate& te, const std::vector<long long>& cnt, const std::vector<double>& avg,
                  const PathLossModel& m) {
    te.per_file.resize(n_files);
    te.per_file_stderr.resize(n_files);
    for (std::size_t n = 0; n < n_files; ++n) {
      te.per_file[n] = static_cast<double>(cnt[n]) / nt;
      te.per_file_stderr[n] = bern(te.per_file[n]);
    }
    te.mean = 0.0;
    for (std::size_t n = 0; n < n_files; ++n) te.mean += q[n] * te.per_file[n];
    te.stderr = bern(te.mean);
    double ss = 0.0;
    for (double v : avg) ss += (v - te.mean) * (v - te.mean);
    te.sample_stderr = trials > 1 ? std::sqrt(ss / (nt - 1.0) / nt) : 0.0;
    te.truncation_bound = truncation_bound(setup, m);
  };
  SimEstimate est;
  const NetworkConfig& cfg = setup.config();
  fill(est.tu, cnt_tu, avg_tu, setup.tu_model());
  fill(est.uav, cnt_uav, avg_uav, setup.uav_model());
  const double wt = cfg.tu_density / cfg.ue_density();
  const double wa = cfg.au_density / cfg.ue_density();
  est.average = wt * est.tu.mean + wa * est.uav.mean;
  est.stderr = bern(est.average);
  est.trials = trials;
  est.seed = seed;
  est.geometry = setup.geometry();
  const double side = 2.0 * setup.geometry().active;
  est.mean_active_density = static_cast<double>(active) / nt / (side * side);
  return est;
}

inline SimEstimate estimate_sdp(const NetworkConfig& cfg, const ZipfCatalog& catalog, const CacheVector& cache,
                                const PathLossModel& tu_model, const PathLossModel& uav_model, std::size_t trials,
                                std::uint64_t seed, const SimOptions& opt = {}) {
  const SimSetup setup(cfg, catalog, cache, tu_model, uav_model, opt);
  return estimate_sdp(setup, trials, seed);
}

// Horizontal serving distance and state for a user at the origin with SBS density rho
// (every SBS holds the file).
struct Association {
  double r = 0.0;
  LinkState state = LinkState::Nlos;
};

inline std::vector<Association> sample_association(const PathLossModel& model, double rho, std::size_t count,
                                                   std::uint64_t seed, double region_half_width = 0.0) {
  NetworkConfig cfg;
  cfg.sbs_density = rho;
  const SimOptions opt{region_half_width, 0.0, 0.0, 4.0, 1};
  const SimSetup setup(cfg, ZipfCatalog{1, 0.0, {1.0}}, CacheVector{{1.0}, 1}, model, model, opt);
  std::vector<Association> out;
  out.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    NetworkDrop drop(setup, seed, t);
    const Server s = drop.best_server({0.0, 0.0}, tag::kTypical, 0, model);
    if (s.found) out.push_back({s.r, s.state});
  }
  return out;
}

// Fraction of SBSs caching `file` that serve at least one request for it, counted in
// the inner half of the active zone, next to the on-probability the analysis uses.
struct ActivationCheck {
  double empirical = 0.0;
  double predicted = 0.0;
  double stderr = 0.0;
  long long sbs = 0;
};

inline ActivationCheck activation_fraction(const SimSetup& setup, std::size_t file, std::size_t trials,
                                           std::uint64_t seed) {
  if (file >= setup.pmf().size()) throw ValidationError("file index out of range");
  if (!(setup.cache()[file] > 0)) throw ValidationError("file is not cached");
  const double inner = 0.5 * setup.geometry().active;
  std::vector<std::pair<long long, long long>> per_trial;  // (active, caching) per drop
  for (std::size_t t = 0; t < trials; ++t) {
    NetworkDrop drop(setup, seed, t);
    const auto act = drop.active_sbs(file);
    std::unordered_set<std::uint64_t> on;
    for (const auto& b : act) on.insert(b.id);
    long long h = 0, m = 0;
    for (const auto& b : drop.sbs_in_square(inner)) {
      if (!drop.caches(b, file)) continue;
      ++m;
      h += on.count(b.id) ? 1 : 0;
    }
    per_trial.emplace_back(h, m);
  }
  long long hits = 0, total = 0;
  for (const auto& [h, m] : per_trial) {
    hits += h;
    total += m;
  }
  ActivationCheck c;
  c.sbs = total;
  if (total > 0) {
    c.empirical = static_cast<double>(hits) / static_cast<double>(total);
    // Ratio estimator with drops as clusters: SBSs in one drop share their UEs.
    double ss = 0.0;
    for (const auto& [h, m] : per_trial) {
      const double d = static_cast<double>(h) - c.empirical * static_cast<double>(m);
      ss += d * d;
    }
    const double nt = static_cast<double>(trials);
    c.stderr = trials > 1 ? std::sqrt(ss * nt / (nt - 1.0)) / static_cast<double>(total) : 0.0;
  }
  const NetworkConfig& cfg = setup.config();
  c.predicted = pr_active(cfg.onoff_q, setup.pmf()[file] * cfg.ue_density(), setup.cache()[file] * cfg.sbs_density);
  return c;
}

}  // namespace sim
}  // namespace cachesdp
