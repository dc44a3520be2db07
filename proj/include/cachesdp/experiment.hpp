#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "cachesdp/analysis.hpp"
#include "cachesdp/asymptotics.hpp"
#include "cachesdp/catalog.hpp"
#include "cachesdp/channel.hpp"
#include "cachesdp/config.hpp"
#include "cachesdp/error.hpp"
#include "cachesdp/optimizer.hpp"
#include "cachesdp/simulator.hpp"

namespace cachesdp {

enum class Strategy { UCS, PCS, OCS };
enum class Engine { Analysis, Dense, SingleSlope, MonteCarlo };
enum class SweepVar { SbsDensity, CacheSize, ZipfBeta, UavHeight };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::UCS: return "UCS";
    case Strategy::PCS: return "PCS";
    default: return "OCS";
  }
}

inline const char* to_string(Engine e) {
  switch (e) {
    case Engine::Analysis: return "analysis";
    case Engine::Dense: return "dense";
    case Engine::SingleSlope: return "single_slope";
    default: return "montecarlo";
  }
}

// Column name in the CSV; carries the unit of the swept value.
inline const char* to_string(SweepVar v) {
  switch (v) {
    case SweepVar::SbsDensity: return "sbs_density_per_km2";
    case SweepVar::CacheSize: return "cache_size";
    case SweepVar::ZipfBeta: return "zipf_beta";
    default: return "uav_height_m";
  }
}

inline Strategy parse_strategy(std::string s) {
  boost::algorithm::to_upper(s);
  if (s == "UCS") return Strategy::UCS;
  if (s == "PCS") return Strategy::PCS;
  if (s == "OCS") return Strategy::OCS;
  throw ValidationError("unknown strategy '" + s + "'");
}

inline Engine parse_engine(std::string s) {
  boost::algorithm::to_lower(s);
  if (s == "analysis") return Engine::Analysis;
  if (s == "dense") return Engine::Dense;
  if (s == "single_slope") return Engine::SingleSlope;
  if (s == "montecarlo" || s == "mc") return Engine::MonteCarlo;
  throw ValidationError("unknown engine '" + s + "'");
}

inline SweepVar parse_sweep_var(std::string s) {
  boost::algorithm::to_lower(s);
  if (s == "sbs_density_per_km2" || s == "sbs_density") return SweepVar::SbsDensity;
  if (s == "cache_size") return SweepVar::CacheSize;
  if (s == "zipf_beta") return SweepVar::ZipfBeta;
  if (s == "uav_height_m" || s == "uav_height") return SweepVar::UavHeight;
  throw ValidationError("unknown sweep variable '" + s + "'");
}

struct ExperimentSpec {
  std::string name = "experiment";
  NetworkConfig network = default_config();
  std::size_t file_count = 100;
  double zipf_beta = 1.0;
  std::size_t cache_size = 10;
  SweepVar sweep = SweepVar::SbsDensity;
  std::vector<double> values;
  std::vector<Strategy> strategies{Strategy::UCS, Strategy::PCS, Strategy::OCS};
  std::vector<Engine> engines{Engine::Analysis};
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  double single_slope_alpha = 4.0;
  ActiveMode analysis_mode = ActiveMode::Exact;
  std::string csv_path;      // empty: <name>.csv
  std::string summary_path;  // empty: csv path with .json
  unsigned workers = 0;      // grid-point pool; 0: hardware concurrency
  sim::SimOptions sim{};
};

// Network, catalog and budget at one sweep value.
struct GridPoint {
  double value = 0.0;
  NetworkConfig cfg;
  std::size_t file_count = 0;
  double zipf_beta = 0.0;
  std::size_t cache_size = 0;
};

inline GridPoint grid_point(const ExperimentSpec& spec, double v) {
  GridPoint g{v, spec.network, spec.file_count, spec.zipf_beta, spec.cache_size};
  switch (spec.sweep) {
    case SweepVar::SbsDensity: g.cfg.sbs_density = units::per_km2(v); break;
    case SweepVar::ZipfBeta: g.zipf_beta = v; break;
    case SweepVar::UavHeight: g.cfg.uav_height = v; break;
    case SweepVar::CacheSize:
      if (!(v >= 1) || v != std::floor(v)) throw ValidationError("cache_size sweep values must be positive integers");
      g.cache_size = static_cast<std::size_t>(v);
      break;
  }
  return g;
}

inline void validate(const ExperimentSpec& spec) {
  if (spec.values.empty()) throw ValidationError("sweep grid is empty");
  if (spec.strategies.empty()) throw ValidationError("strategies list is empty");
  if (spec.engines.empty()) throw ValidationError("engines list is empty");
  if (spec.trials < 1) throw ValidationError("trials must be >= 1");
  for (double v : spec.values) {
    if (!std::isfinite(v)) throw ValidationError("sweep values must be finite");
    const GridPoint g = grid_point(spec, v);
    validate(g.cfg);
    check_budget(g.file_count, g.cache_size);
    if (!(g.zipf_beta >= 0)) throw ValidationError("zipf_beta must be >= 0");
    // builds both channel models, which rejects bad height/cutoff layouts
    make_tu_model(g.cfg);
    make_uav_model(g.cfg);
  }
  if (std::find(spec.engines.begin(), spec.engines.end(), Engine::SingleSlope) != spec.engines.end())
    validate(SingleSlopeModel{spec.single_slope_alpha, 1.0});
}

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  boost::algorithm::split(out, s, boost::algorithm::is_any_of(", \t"), boost::algorithm::token_compress_on);
  out.erase(std::remove_if(out.begin(), out.end(), [](const std::string& x) { return x.empty(); }), out.end());
  return out;
}

inline double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("key '" + key + "': '" + s + "' is not a number");
  }
}

inline std::uint64_t to_uint(const std::string& key, const std::string& s) {
  try {
    if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) return std::stoull(s);
  } catch (const std::exception&) {
    throw ValidationError("key '" + key + "' is out of range");
  }
  const double v = to_double(key, s);
  if (!(v >= 0) || v != std::floor(v) || v > 9e15) throw ValidationError("key '" + key + "' must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

}  // namespace detail

// INI text with sections network, catalog, sweep, engines, output. Physical keys carry
// unit suffixes and are converted to SI here.
inline ExperimentSpec parse_spec(std::istream& in, const std::string& default_name = "experiment") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config parse error: ") + e.what());
  }
  ExperimentSpec spec;
  spec.name = default_name;
  const std::map<std::string, std::vector<std::string>> known{
      {"network",
       {"sbs_density_per_km2", "tu_density_per_km2", "au_density_per_km2", "tx_power_dbm", "noise_power_dbm",
        "sinr_threshold_db", "sbs_height_m", "tu_height_m", "uav_height_m", "onoff_q", "tu_los_cutoff_m"}},
      {"catalog", {"file_count", "zipf_beta", "cache_size"}},
      {"sweep", {"variable", "values"}},
      {"engines", {"engines", "strategies", "trials", "seed", "single_slope_alpha", "analysis_mode", "workers",
                   "sim_region_half_width_m", "sim_active_half_width_m"}},
      {"output", {"name", "csv", "summary"}}};
  for (const auto& [section, body] : tree) {
    auto it = known.find(section);
    if (it == known.end()) throw ValidationError("unknown section [" + section + "]");
    if (!body.data().empty()) throw ValidationError("key outside a section: " + section);
    for (const auto& [key, _] : body) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        throw ValidationError("unknown key '" + key + "' in [" + section + "]");
    }
  }
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(path)) return boost::algorithm::trim_copy(*v);
    return std::nullopt;
  };
  auto num = [&](const std::string& path, auto apply) {
    if (auto v = get(path)) apply(detail::to_double(path, *v));
  };
  NetworkConfig& c = spec.network;
  num("network.sbs_density_per_km2", [&](double v) { c.sbs_density = units::per_km2(v); });
  num("network.tu_density_per_km2", [&](double v) { c.tu_density = units::per_km2(v); });
  num("network.au_density_per_km2", [&](double v) { c.au_density = units::per_km2(v); });
  num("network.tx_power_dbm", [&](double v) { c.tx_power = units::dbm_to_watts(v); });
  if (auto v = get("network.noise_power_dbm")) {
    std::string s = boost::algorithm::to_lower_copy(*v);
    c.noise_power = (s == "none" || s == "-inf") ? 0.0 : units::dbm_to_watts(detail::to_double("network.noise_power_dbm", *v));
  }
  num("network.sinr_threshold_db", [&](double v) { c.sinr_threshold = units::db_to_linear(v); });
  num("network.sbs_height_m", [&](double v) { c.sbs_height = v; });
  num("network.tu_height_m", [&](double v) { c.tu_height = v; });
  num("network.uav_height_m", [&](double v) { c.uav_height = v; });
  num("network.onoff_q", [&](double v) { c.onoff_q = v; });
  num("network.tu_los_cutoff_m", [&](double v) { c.tu_los_cutoff = v; });

  if (auto v = get("catalog.file_count")) spec.file_count = detail::to_uint("catalog.file_count", *v);
  num("catalog.zipf_beta", [&](double v) { spec.zipf_beta = v; });
  if (auto v = get("catalog.cache_size")) spec.cache_size = detail::to_uint("catalog.cache_size", *v);

  if (auto v = get("sweep.variable")) spec.sweep = parse_sweep_var(*v);
  if (auto v = get("sweep.values")) {
    for (const auto& tok : detail::split_list(*v)) spec.values.push_back(detail::to_double("sweep.values", tok));
  }

  if (auto v = get("engines.engines")) {
    spec.engines.clear();
    for (const auto& tok : detail::split_list(*v)) spec.engines.push_back(parse_engine(tok));
  }
  if (auto v = get("engines.strategies")) {
    spec.strategies.clear();
    for (const auto& tok : detail::split_list(*v)) spec.strategies.push_back(parse_strategy(tok));
  }
  if (auto v = get("engines.trials")) spec.trials = detail::to_uint("engines.trials", *v);
  if (auto v = get("engines.seed")) spec.seed = detail::to_uint("engines.seed", *v);
  num("engines.single_slope_alpha", [&](double v) { spec.single_slope_alpha = v; });
  if (auto v = get("engines.analysis_mode")) {
    const std::string s = boost::algorithm::to_lower_copy(*v);
    if (s == "exact") spec.analysis_mode = ActiveMode::Exact;
    else if (s == "approx") spec.analysis_mode = ActiveMode::Approx;
    else throw ValidationError("analysis_mode must be exact or approx");
  }
  if (auto v = get("engines.workers")) spec.workers = static_cast<unsigned>(detail::to_uint("engines.workers", *v));
  num("engines.sim_region_half_width_m", [&](double v) { spec.sim.region_half_width = v; });
  num("engines.sim_active_half_width_m", [&](double v) { spec.sim.active_half_width = v; });

  if (auto v = get("output.name")) spec.name = *v;
  if (auto v = get("output.csv")) spec.csv_path = *v;
  if (auto v = get("output.summary")) spec.summary_path = *v;
  return spec;
}

inline ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open spec file " + path);
  return parse_spec(in, std::filesystem::path(path).stem().string());
}

struct ResultRow {
  double sweep_value = 0.0;
  Strategy strategy = Strategy::UCS;
  Engine engine = Engine::Analysis;
  std::string tier;  // tu, uav, average
  double sdp = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> stderr_;  // Monte Carlo only
  std::optional<double> tol;      // quadrature error estimate, analysis only
  double wall_ms = 0.0;
  std::string status = "ok";
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<ResultRow> rows;
  std::size_t failed_rows = 0;
};

namespace detail {

inline CacheVector strategy_vector(Strategy s, const DenseObjective& env, std::size_t m, std::string& status) {
  switch (s) {
    case Strategy::UCS: return ucs_vector(env.size(), m);
    case Strategy::PCS: return pcs_vector(env.size(), m);
    default:
      try {
        return optimize_caching(env, m);
      } catch (const OptimizerError& e) {
        status = "optimizer_stalled";
        return e.best();
      }
  }
}

inline std::string clean(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  return s;
}

// Rows for one (grid point, strategy): engines in spec order, tiers tu/uav/average.
inline std::vector<ResultRow> run_cell(const ExperimentSpec& spec, const GridPoint& g, Strategy strat, unsigned sim_threads) {
  using clock = std::chrono::steady_clock;
  std::vector<ResultRow> rows;
  auto emit = [&](Engine e, double tu, double uav, double avg, std::optional<double> se_tu, std::optional<double> se_uav,
                  std::optional<double> se_avg, std::optional<double> tol_tu, std::optional<double> tol_uav,
                  std::optional<double> tol_avg, double ms, const std::string& status) {
    const char* tiers[] = {"tu", "uav", "average"};
    const double v[] = {tu, uav, avg};
    const std::optional<double> se[] = {se_tu, se_uav, se_avg};
    const std::optional<double> tl[] = {tol_tu, tol_uav, tol_avg};
    for (int i = 0; i < 3; ++i) rows.push_back({g.value, strat, e, tiers[i], v[i], se[i], tl[i], ms, status});
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::string cache_status = "ok";
  std::optional<CacheVector> cache;
  std::optional<PathLossModel> tu, uav;
  std::optional<ZipfCatalog> cat;
  std::optional<DenseObjective> env;
  const auto t_setup = clock::now();
  try {
    cat = zipf_pmf(g.file_count, g.zipf_beta);
    tu = make_tu_model(g.cfg);
    uav = make_uav_model(g.cfg);
    env.emplace(*cat, g.cfg, *tu, *uav);
    cache = strategy_vector(strat, *env, g.cache_size, cache_status);
  } catch (const std::exception& e) {
    cache_status = std::string("error: ") + e.what();
  }
  const double setup_ms = std::chrono::duration<double, std::milli>(clock::now() - t_setup).count();
  const double wt = g.cfg.tu_density / g.cfg.ue_density();
  const double wa = g.cfg.au_density / g.cfg.ue_density();
  for (Engine e : spec.engines) {
    if (!cache) {
      emit(e, nan, nan, nan, {}, {}, {}, {}, {}, {}, setup_ms, clean(cache_status));
      continue;
    }
    const auto t0 = clock::now();
    std::string status = cache_status;
    auto ms = [&] { return setup_ms + std::chrono::duration<double, std::milli>(clock::now() - t0).count(); };
    try {
      switch (e) {
        case Engine::Analysis: {
          TierContext ctx{*cat, *cache, g.cfg, spec.analysis_mode, {}};
          const SdpReport r = average_sdp(ctx, *tu, *uav);
          emit(e, r.tiers[0].average, r.tiers[1].average, r.average, {}, {}, {}, r.tiers[0].abs_error,
               r.tiers[1].abs_error, r.abs_error, ms(), status);
          break;
        }
        case Engine::Dense: {
          const auto v = env->evaluate(*cache);
          emit(e, v.tu, v.uav, v.average, {}, {}, {}, {}, {}, {}, ms(), status);
          break;
        }
        case Engine::SingleSlope: {
          const double pt = avg_sdp_single_slope(*cat, *cache, g.cfg, {spec.single_slope_alpha, g.cfg.tu_height_diff()});
          const double pa = avg_sdp_single_slope(*cat, *cache, g.cfg, {spec.single_slope_alpha, g.cfg.uav_height_diff()});
          emit(e, pt, pa, wt * pt + wa * pa, {}, {}, {}, {}, {}, {}, ms(), status);
          break;
        }
        case Engine::MonteCarlo: {
          sim::SimOptions so = spec.sim;
          so.threads = sim_threads;
          const auto r = sim::estimate_sdp(g.cfg, *cat, *cache, *tu, *uav, spec.trials, spec.seed, so);
          emit(e, r.tu.mean, r.uav.mean, r.average, r.tu.stderr, r.uav.stderr, r.stderr, {}, {}, {}, ms(), status);
          break;
        }
      }
    } catch (const std::exception& ex) {
      emit(e, nan, nan, nan, {}, {}, {}, {}, {}, {}, ms(), clean(std::string("error: ") + ex.what()));
    }
  }
  return rows;
}

}  // namespace detail

// Every (sweep value, strategy) cell runs in a worker pool. Rows come back in sweep,
// strategy, engine, tier order whatever the completion order.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  ExperimentResult res{spec, {}, 0};
  struct Job {
    GridPoint g;
    Strategy s;
  };
  std::vector<Job> jobs;
  for (double v : spec.values)
    for (Strategy s : spec.strategies) jobs.push_back({grid_point(spec, v), s});
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned pool = std::max(1u, std::min<unsigned>(spec.workers ? spec.workers : hw, static_cast<unsigned>(jobs.size())));
  const unsigned sim_threads = std::max(1u, hw / pool);
  std::vector<std::vector<ResultRow>> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) out[i] = detail::run_cell(spec, jobs[i].g, jobs[i].s, sim_threads);
  };
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < pool; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  for (auto& rows : out) {
    for (auto& r : rows) {
      if (r.status != "ok") ++res.failed_rows;
      res.rows.push_back(std::move(r));
    }
  }
  return res;
}

namespace detail {
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
}  // namespace detail

// wall_ms is left empty unless timing is requested so reruns stay byte-identical.
inline void write_csv(const ExperimentResult& res, std::ostream& os, bool timing = false) {
  os << "sweep_name,sweep_value,strategy,engine,tier,sdp,stderr,tol,wall_ms,seed,status\n";
  const char* name = to_string(res.spec.sweep);
  for (const auto& r : res.rows) {
    os << name << ',' << detail::fmt(r.sweep_value) << ',' << to_string(r.strategy) << ',' << to_string(r.engine) << ','
       << r.tier << ',' << detail::fmt(r.sdp) << ',' << (r.stderr_ ? detail::fmt(*r.stderr_) : "") << ','
       << (r.tol ? detail::fmt(*r.tol) : "") << ',';
    if (timing) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.1f", r.wall_ms);
      os << buf;
    }
    os << ',' << res.spec.seed << ',' << r.status << '\n';
  }
}

inline nlohmann::json config_echo(const ExperimentSpec& spec) {
  const NetworkConfig& c = spec.network;
  nlohmann::json net{{"sbs_density_per_km2", units::to_per_km2(c.sbs_density)},
                     {"tu_density_per_km2", units::to_per_km2(c.tu_density)},
                     {"au_density_per_km2", units::to_per_km2(c.au_density)},
                     {"tx_power_dbm", units::watts_to_dbm(c.tx_power)},
                     {"noise_power_w", c.noise_power},
                     {"sinr_threshold_db", units::linear_to_db(c.sinr_threshold)},
                     {"sbs_height_m", c.sbs_height},
                     {"tu_height_m", c.tu_height},
                     {"uav_height_m", c.uav_height},
                     {"onoff_q", c.onoff_q},
                     {"tu_los_cutoff_m", c.tu_los_cutoff}};
  nlohmann::json strategies = nlohmann::json::array(), engines = nlohmann::json::array();
  for (auto s : spec.strategies) strategies.push_back(to_string(s));
  for (auto e : spec.engines) engines.push_back(to_string(e));
  return {{"name", spec.name},
          {"network", net},
          {"catalog", {{"file_count", spec.file_count}, {"zipf_beta", spec.zipf_beta}, {"cache_size", spec.cache_size}}},
          {"sweep", {{"variable", to_string(spec.sweep)}, {"values", spec.values}}},
          {"strategies", strategies},
          {"engines", engines},
          {"trials", spec.trials},
          {"seed", spec.seed},
          {"single_slope_alpha", spec.single_slope_alpha},
          {"analysis_mode", to_string(spec.analysis_mode)}};
}

inline nlohmann::json summary(const ExperimentResult& res, const std::string& git_hash) {
  nlohmann::json j;
  j["config"] = config_echo(res.spec);
  j["provenance"] = {{"git_hash", git_hash}, {"seed", res.spec.seed}};
  j["rows"] = res.rows.size();
  j["failed_rows"] = res.failed_rows;
  return j;
}

inline std::string csv_path(const ExperimentSpec& spec) { return spec.csv_path.empty() ? spec.name + ".csv" : spec.csv_path; }

inline std::string summary_path(const ExperimentSpec& spec) {
  if (!spec.summary_path.empty()) return spec.summary_path;
  return std::filesystem::path(csv_path(spec)).replace_extension(".json").string();
}

}  // namespace cachesdp
