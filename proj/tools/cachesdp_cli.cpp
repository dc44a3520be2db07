#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cachesdp/cachesdp.hpp"

#ifndef CACHESDP_GIT_HASH
#define CACHESDP_GIT_HASH "unknown"
#endif

using namespace cachesdp;

namespace {

void print_limits(const ExperimentSpec& spec) {
  const auto cat = zipf_pmf(spec.file_count, spec.zipf_beta);
  const NetworkConfig& c = spec.network;
  std::printf("single-slope limits, alpha = %g, N = %zu, M = %zu, beta = %g\n", spec.single_slope_alpha,
              spec.file_count, spec.cache_size, spec.zipf_beta);
  std::printf("%-5s %-14s %-12s %-12s\n", "tier", "limit", "PCS", "UCS");
  const struct {
    const char* name;
    double h;
  } tiers[] = {{"tu", c.tu_height_diff()}, {"uav", c.uav_height_diff()}};
  for (const auto& t : tiers) {
    const SingleSlopeModel m{spec.single_slope_alpha, t.h};
    const auto d = limit_dense(cat, spec.cache_size, c, m);
    const auto b = limit_beta(spec.cache_size, spec.file_count, c, m);
    std::printf("%-5s %-14s %-12.8f %-12.8f\n", t.name, "lambda_s->inf", d.pcs, d.ucs);
    std::printf("%-5s %-14s %-12.8f %-12.8f\n", t.name, "beta->inf", b.pcs, b.ucs);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probabilistic caching SDP: analysis, optimization and Monte Carlo sweeps"};
  app.require_subcommand(1);

  std::string spec_file;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::string out, engines;
  unsigned workers = 0;
  bool timing = false;
  bool full = false;

  auto* run = app.add_subcommand("run", "run a sweep and write CSV plus a JSON summary");
  run->add_option("spec", spec_file, "INI experiment spec")->required()->check(CLI::ExistingFile);
  auto* o_trials = run->add_option("--trials", trials, "Monte Carlo trials per grid point");
  auto* o_seed = run->add_option("--seed", seed, "base seed");
  run->add_option("--out", out, "CSV output path");
  run->add_option("--engines", engines, "comma list: analysis,dense,single_slope,montecarlo");
  run->add_option("--workers", workers, "grid-point worker threads (0: all cores)");
  run->add_flag("--full", full, "figure-scale run: 1e5 Monte Carlo trials per grid point unless --trials is given");
  run->add_flag("--timing", timing, "fill the wall_ms column (output no longer byte-stable)");

  auto* val = app.add_subcommand("validate", "parse and check a spec without computing");
  val->add_option("spec", spec_file, "INI experiment spec")->required()->check(CLI::ExistingFile);

  auto* lim = app.add_subcommand("limits", "print the dense and large-beta single-slope limits");
  lim->add_option("spec", spec_file, "INI experiment spec")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentSpec spec = load_spec(spec_file);
    if (*run) {
      if (full) spec.trials = 100000;
      if (*o_trials) spec.trials = trials;
      if (*o_seed) spec.seed = seed;
      if (!out.empty()) {
        spec.csv_path = out;
        spec.summary_path.clear();
      }
      if (!engines.empty()) {
        spec.engines.clear();
        for (const auto& e : detail::split_list(engines)) spec.engines.push_back(parse_engine(e));
      }
      if (workers) spec.workers = workers;
    }
    validate(spec);
    if (*val) {
      std::printf("ok: %s, %zu grid points x %zu strategies x %zu engines\n", spec.name.c_str(), spec.values.size(),
                  spec.strategies.size(), spec.engines.size());
      return 0;
    }
    if (*lim) {
      print_limits(spec);
      return 0;
    }
    const auto res = run_experiment(spec);
    const std::string csv = csv_path(spec);
    for (const std::filesystem::path p : {csv, summary_path(spec)})
      if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    {
      std::ofstream f(csv, std::ios::binary);
      if (!f) throw ValidationError("cannot write " + csv);
      write_csv(res, f, timing);
    }
    {
      const std::string js = summary_path(spec);
      std::ofstream f(js, std::ios::binary);
      if (!f) throw ValidationError("cannot write " + js);
      f << summary(res, CACHESDP_GIT_HASH).dump(2) << '\n';
    }
    std::printf("%s: %zu rows, %zu flagged -> %s\n", spec.name.c_str(), res.rows.size(), res.failed_rows, csv.c_str());
    return res.failed_rows ? 2 : 0;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 1;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
