#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "cachesdp/asymptotics.hpp"
#include "cachesdp/catalog.hpp"
#include "cachesdp/error.hpp"

namespace cachesdp {

struct OptimizerOptions {
  double budget_tol = 1e-3;
  int max_iterations = 500;
  double initial_step = 0.0;  // <= 0: scaled from the largest marginal gain
  double root_tol = 1e-8;
  int scan_points = 8;        // sign-change scan of the subproblem derivative
  bool polish = true;         // bisect gamma further and project onto sum(S) = M
};

struct OptimizerState {
  double gamma = 0.0;
  double step = 0.0;
  int iteration = 0;
  double budget_residual = 0.0;
  std::vector<double> probs;
  std::vector<double> residual_history;
};

// Raised when the dual iteration stalls; carries the best iterate projected onto the budget.
class OptimizerError : public NumericalError {
 public:
  OptimizerError(const std::string& what, CacheVector best, double residual, int iterations)
      : NumericalError(what, residual, std::abs(residual), iterations), best_(std::move(best)), residual_(residual) {}
  const CacheVector& best() const { return best_; }
  double residual() const { return residual_; }

 private:
  CacheVector best_;
  double residual_;
};

// L_n(S) = Q_n S [int G_n e^{-WS} + int H_n e^{-WS}] + gamma S.
inline double lagrangian_n(double s, double gamma, std::size_t n, const DenseObjective& env) {
  if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("S_n must lie in [0,1]");
  return env.file_value(n, s) + gamma * s;
}

inline double dlagrangian_n(double s, double gamma, std::size_t n, const DenseObjective& env) {
  if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("S_n must lie in [0,1]");
  return env.file_derivative(n, s) + gamma;
}

// argmax over [0,1] of L_n: every sign change of dL/dS on a scan grid is bracketed and the
// roots compete with the endpoints; ties go to the smaller S.
inline double solve_subproblem(std::size_t n, double gamma, const DenseObjective& env,
                               const OptimizerOptions& opt = {}) {
  std::vector<double> cand{0.0, 1.0};
  const int m = std::max(1, opt.scan_points);
  double a = 0.0;
  double da = dlagrangian_n(a, gamma, n, env);
  for (int i = 1; i <= m; ++i) {
    const double b = static_cast<double>(i) / m;
    const double db = dlagrangian_n(b, gamma, n, env);
    if (da == 0.0) cand.push_back(a);
    if ((da > 0 && db < 0) || (da < 0 && db > 0)) {
      auto f = [&](double x) { return dlagrangian_n(x, gamma, n, env); };
      auto tol = [&](double lo, double hi) { return hi - lo <= opt.root_tol; };
      std::uintmax_t iters = 200;
      const auto br = boost::math::tools::toms748_solve(f, a, b, da, db, tol, iters);
      cand.push_back(0.5 * (br.first + br.second));
    }
    a = b;
    da = db;
  }
  std::sort(cand.begin(), cand.end());
  double best_s = cand.front();
  double best_v = lagrangian_n(best_s, gamma, n, env);
  for (std::size_t i = 1; i < cand.size(); ++i) {
    const double v = lagrangian_n(cand[i], gamma, n, env);
    if (v > best_v + 1e-15 * std::max(1.0, std::abs(best_v))) {
      best_v = v;
      best_s = cand[i];
    }
  }
  return best_s;
}

namespace detail {

// Subproblems are independent under a fixed gamma; split them over hardware threads.
inline std::vector<double> solve_all(double gamma, const DenseObjective& env, const OptimizerOptions& opt) {
  const std::size_t n = env.size();
  std::vector<double> s(n);
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1 || n < 8) {
    for (std::size_t i = 0; i < n; ++i) s[i] = solve_subproblem(i, gamma, env, opt);
    return s;
  }
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += workers) s[i] = solve_subproblem(i, gamma, env, opt);
    }));
  for (auto& j : jobs) j.get();
  return s;
}

inline double sum(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc;
}

// Euclidean projection onto {0 <= S <= 1, sum S = M}: S_n - tau clipped, tau by bisection.
inline std::vector<double> project_to_budget(std::vector<double> s, double m) {
  auto total = [&](double tau) {
    double acc = 0.0;
    for (double x : s) acc += std::clamp(x - tau, 0.0, 1.0);
    return acc;
  };
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) > m ? lo : hi) = mid;
  }
  const double tau = 0.5 * (lo + hi);
  for (double& x : s) x = std::clamp(x - tau, 0.0, 1.0);
  return s;
}

}  // namespace detail

// Dual ascent on gamma for max sum_n f_n(S_n) s.t. sum S_n <= M, 0 <= S_n <= 1.
// Subproblems maximize f_n(S_n) + gamma S_n, so gamma <= 0 prices the budget and the
// update lowers gamma while the budget is exceeded.
inline CacheVector optimize_caching(const DenseObjective& env, std::size_t m, const OptimizerOptions& opt = {},
                                    OptimizerState* state_out = nullptr) {
  const std::size_t n_files = env.size();
  check_budget(n_files, m);
  const double budget = static_cast<double>(m);
  OptimizerState st;
  if (m == n_files) {
    st.probs.assign(n_files, 1.0);
    if (state_out) *state_out = st;
    return {st.probs, m};
  }
  double scale = 0.0;
  for (std::size_t n = 0; n < n_files; ++n) scale = std::max(scale, std::abs(env.file_derivative(n, 0.0)));
  if (!(scale > 0)) scale = 1.0;
  st.step = opt.initial_step > 0 ? opt.initial_step : scale / budget;
  st.gamma = 0.0;

  // Tightest observed bracket around the budget crossing.
  double g_over = std::numeric_limits<double>::quiet_NaN();   // gamma with sum(S) > M
  double g_under = std::numeric_limits<double>::quiet_NaN();  // gamma with sum(S) < M
  double best_abs = std::numeric_limits<double>::infinity();
  std::vector<double> best;
  double prev_res = 0.0;
  bool converged = false;
  for (st.iteration = 1; st.iteration <= opt.max_iterations; ++st.iteration) {
    st.probs = detail::solve_all(st.gamma, env, opt);
    st.budget_residual = detail::sum(st.probs) - budget;
    st.residual_history.push_back(st.budget_residual);
    if (std::abs(st.budget_residual) < best_abs) {
      best_abs = std::abs(st.budget_residual);
      best = st.probs;
    }
    if (st.budget_residual > 0) {
      g_over = std::isnan(g_over) ? st.gamma : std::min(g_over, st.gamma);
    } else if (st.budget_residual < 0) {
      g_under = std::isnan(g_under) ? st.gamma : std::max(g_under, st.gamma);
    }
    if (std::abs(st.budget_residual) <= opt.budget_tol) {
      converged = true;
      break;
    }
    if (st.iteration > 1 && (st.budget_residual > 0) != (prev_res > 0)) st.step *= 0.5;
    prev_res = st.budget_residual;
    st.gamma -= st.step * st.budget_residual;
  }
  if (!converged) {
    CacheVector projected{detail::project_to_budget(best, budget), m};
    if (state_out) *state_out = st;
    throw OptimizerError("caching optimizer did not meet the budget tolerance", projected,
                         best_abs, opt.max_iterations);
  }
  if (opt.polish && !std::isnan(g_over) && !std::isnan(g_under)) {
    // sum(S) is non-increasing as gamma decreases; bisect the observed bracket.
    double lo = g_under, hi = g_over;  // lo < hi
    for (int i = 0; i < 200 && std::abs(st.budget_residual) > 1e-9 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
      const double mid = 0.5 * (lo + hi);
      auto s = detail::solve_all(mid, env, opt);
      const double res = detail::sum(s) - budget;
      if (std::abs(res) <= std::abs(st.budget_residual)) {
        st.probs = s;
        st.budget_residual = res;
        st.gamma = mid;
      }
      (res > 0 ? hi : lo) = mid;
    }
  }
  st.probs = detail::project_to_budget(st.probs, budget);
  st.budget_residual = detail::sum(st.probs) - budget;
  if (state_out) *state_out = st;
  return {st.probs, m};
}

inline CacheVector optimize_caching(const ZipfCatalog& catalog, std::size_t m, const NetworkConfig& cfg,
                                    const PathLossModel& tu_model, const PathLossModel& uav_model,
                                    const OptimizerOptions& opt = {}, OptimizerState* state_out = nullptr) {
  const DenseObjective env(catalog, cfg, tu_model, uav_model);
  return optimize_caching(env, m, opt, state_out);
}

}  // namespace cachesdp
