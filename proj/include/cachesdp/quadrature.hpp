#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "cachesdp/error.hpp"

namespace cachesdp::quad {

struct Options {
  double abs_tol = 1e-13;
  double rel_tol = 1e-10;
  int max_subdivisions = 4000;
  // Semi-infinite ranges: stop once a doubled piece adds less than this fraction.
  double tail_rel_tol = 1e-10;
  int max_tail_pieces = 200;
};

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = true;

  Result& operator+=(const Result& o) {
    value += o.value;
    abs_error += o.abs_error;
    evaluations += o.evaluations;
    converged = converged && o.converged;
    return *this;
  }
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae (descending, last is the centre) and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for kXgk[1], kXgk[3], kXgk[5], kXgk[7].
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double kronrod_error(double k15, double g7, double resasc) {
  double err = std::abs(k15 - g7);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  return err;
}

template <class F>
Result gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 15> fv{};
  const double fc = f(c);
  double k15 = fc * kWgk[7];
  double g7 = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    fv[2 * j] = f1;
    fv[2 * j + 1] = f2;
    k15 += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) g7 += kWg[j / 2] * (f1 + f2);
  }
  fv[14] = fc;
  const double mean = 0.5 * k15;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::abs(fv[2 * j] - mean) + std::abs(fv[2 * j + 1] - mean));
  Result r;
  r.value = k15 * half;
  r.abs_error = kronrod_error(k15 * half, g7 * half, resasc * std::abs(half));
  r.evaluations = 15;
  return r;
}

struct Interval {
  double a, b;
  double value, error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

}  // namespace detail

// Globally adaptive Gauss-Kronrod on a finite interval (QAG-style bisection of the
// interval with the largest error estimate).
template <class F>
Result integrate(const F& f, double a, double b, const Options& opt = {}) {
  if (!(b > a)) return Result{};
  std::priority_queue<detail::Interval> heap;
  Result first = detail::gk15(f, a, b);
  heap.push({a, b, first.value, first.abs_error});
  double total = first.value;
  double err = first.abs_error;
  int evals = first.evaluations;
  int subdivisions = 1;
  while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (subdivisions >= opt.max_subdivisions) break;
    const detail::Interval top = heap.top();
    const double mid = 0.5 * (top.a + top.b);
    if (!(mid > top.a && mid < top.b)) break;  // interval exhausted at double precision
    heap.pop();
    const Result left = detail::gk15(f, top.a, mid);
    const Result right = detail::gk15(f, mid, top.b);
    evals += left.evaluations + right.evaluations;
    total += left.value + right.value - top.value;
    err += left.abs_error + right.abs_error - top.error;
    heap.push({top.a, mid, left.value, left.abs_error});
    heap.push({mid, top.b, right.value, right.abs_error});
    ++subdivisions;
  }
  // Re-sum to remove drift from the running updates.
  total = 0.0;
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  Result r;
  r.value = total;
  r.abs_error = err;
  r.evaluations = evals;
  r.converged = err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total)) * 10.0;
  return r;
}

// Integral over [a, inf) by interval doubling: pieces [a, a+w], [a+w, a+3w], ...
// until a piece contributes less than tail_rel_tol of the running total twice in a row.
template <class F>
Result integrate_to_infinity(const F& f, double a, double initial_width, const Options& opt = {}) {
  double lo = a;
  double width = initial_width > 0 ? initial_width : 1.0;
  Result total;
  int small_pieces = 0;
  for (int piece = 0; piece < opt.max_tail_pieces; ++piece) {
    const Result part = integrate(f, lo, lo + width, opt);
    total += part;
    if (std::abs(part.value) <= opt.tail_rel_tol * std::abs(total.value) + opt.abs_tol) {
      if (++small_pieces >= 2) return total;
    } else {
      small_pieces = 0;
    }
    lo += width;
    width *= 2.0;
    if (!std::isfinite(lo + width)) break;
  }
  total.converged = false;
  return total;
}

// Sum of finite integrals over consecutive breakpoints, optionally followed by a tail.
template <class F>
Result integrate_breakpoints(const F& f, std::span<const double> points, const Options& opt = {}) {
  Result total;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = points[i];
    const double b = points[i + 1];
    if (!(b > a)) continue;
    if (std::isinf(b)) {
      total += integrate_to_infinity(f, a, std::max(1.0, std::abs(a)), opt);
    } else {
      total += integrate(f, a, b, opt);
    }
  }
  return total;
}

inline Result checked(const Result& r, const std::string& what) {
  if (!r.converged) throw NumericalError(what + ": quadrature did not converge", r.value, r.abs_error, r.evaluations);
  return r;
}

// Vector-valued adaptive rule: all components share the subdivision; the error used
// for refinement is the sum of component errors.
class VectorIntegrator {
 public:
  explicit VectorIntegrator(std::size_t dim, Options opt = {}) : dim_(dim), opt_(opt) {}

  struct VectorResult {
    std::vector<double> value;
    std::vector<double> abs_error;
    int evaluations = 0;
    bool converged = true;
  };

  // f(x, out) writes dim values for abscissa x.
  template <class F>
  VectorResult integrate(const F& f, double a, double b) const {
    VectorResult res;
    res.value.assign(dim_, 0.0);
    res.abs_error.assign(dim_, 0.0);
    if (!(b > a)) return res;
    struct Node {
      double a, b, err;
      std::size_t slot;
      bool operator<(const Node& o) const { return err < o.err; }
    };
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> errors;
    std::vector<double> sum(dim_, 0.0);
    double tot_err = 0.0;
    std::priority_queue<Node> heap;
    auto push = [&](double lo, double hi) {
      std::vector<double> v(dim_), e(dim_);
      rule(f, lo, hi, v, e);
      res.evaluations += 15;
      double esum = 0.0;
      for (std::size_t d = 0; d < dim_; ++d) {
        esum += e[d];
        sum[d] += v[d];
      }
      tot_err += esum;
      values.push_back(std::move(v));
      errors.push_back(std::move(e));
      heap.push({lo, hi, esum, values.size() - 1});
    };
    push(a, b);
    int subdivisions = 1;
    while (true) {
      double scale = 0.0;
      for (double v : sum) scale = std::max(scale, std::abs(v));
      const double tol = std::max(opt_.abs_tol, opt_.rel_tol * scale);
      if (tot_err <= tol) break;
      if (subdivisions >= opt_.max_subdivisions) {
        res.converged = tot_err <= 10.0 * tol;
        break;
      }
      const Node top = heap.top();
      const double mid = 0.5 * (top.a + top.b);
      if (!(mid > top.a && mid < top.b)) break;
      heap.pop();
      tot_err -= top.err;
      for (std::size_t d = 0; d < dim_; ++d) sum[d] -= values[top.slot][d];
      push(top.a, mid);
      push(mid, top.b);
      ++subdivisions;
    }
    // Re-sum the surviving leaves.
    while (!heap.empty()) {
      const Node n = heap.top();
      heap.pop();
      for (std::size_t d = 0; d < dim_; ++d) {
        res.value[d] += values[n.slot][d];
        res.abs_error[d] += errors[n.slot][d];
      }
    }
    return res;
  }

  // [a, inf) by interval doubling; stops after two consecutive pieces in which every
  // component adds less than tail_rel_tol of its running total (or abs_tol).
  template <class F>
  VectorResult integrate_to_infinity(const F& f, double a, double initial_width) const {
    VectorResult total;
    total.value.assign(dim_, 0.0);
    total.abs_error.assign(dim_, 0.0);
    double lo = a;
    double width = initial_width > 0 ? initial_width : 1.0;
    int small_pieces = 0;
    for (int piece = 0; piece < opt_.max_tail_pieces; ++piece) {
      const VectorResult part = integrate(f, lo, lo + width);
      bool small = true;
      for (std::size_t d = 0; d < dim_; ++d) {
        total.value[d] += part.value[d];
        total.abs_error[d] += part.abs_error[d];
        if (std::abs(part.value[d]) > opt_.tail_rel_tol * std::abs(total.value[d]) + opt_.abs_tol) small = false;
      }
      total.evaluations += part.evaluations;
      total.converged = total.converged && part.converged;
      if (small) {
        if (++small_pieces >= 2) return total;
      } else {
        small_pieces = 0;
      }
      lo += width;
      width *= 2.0;
      if (!std::isfinite(lo + width)) break;
    }
    total.converged = false;
    return total;
  }

  std::size_t dim() const { return dim_; }
  const Options& options() const { return opt_; }

 private:
  template <class F>
  void rule(const F& f, double a, double b, std::vector<double>& val, std::vector<double>& err) const {
    using namespace detail;
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::vector<std::array<double, 15>> fv(dim_);
    std::vector<double> buf(dim_);
    auto eval = [&](double x, int slot) {
      f(x, std::span<double>(buf));
      for (std::size_t d = 0; d < dim_; ++d) fv[d][slot] = buf[d];
    };
    eval(c, 14);
    for (int j = 0; j < 7; ++j) {
      const double dx = half * kXgk[j];
      eval(c - dx, 2 * j);
      eval(c + dx, 2 * j + 1);
    }
    for (std::size_t d = 0; d < dim_; ++d) {
      const auto& v = fv[d];
      double k15 = v[14] * kWgk[7];
      double g7 = v[14] * kWg[3];
      for (int j = 0; j < 7; ++j) {
        const double s = v[2 * j] + v[2 * j + 1];
        k15 += kWgk[j] * s;
        if (j % 2 == 1) g7 += kWg[j / 2] * s;
      }
      const double mean = 0.5 * k15;
      double resasc = kWgk[7] * std::abs(v[14] - mean);
      for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(v[2 * j] - mean) + std::abs(v[2 * j + 1] - mean));
      val[d] = k15 * half;
      err[d] = kronrod_error(k15 * half, g7 * half, resasc * std::abs(half));
    }
  }

  std::size_t dim_;
  Options opt_;
};

// Fixed Gauss-Legendre nodes on [-1, 1] computed by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    for (int i = 0; i < n; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

}  // namespace cachesdp::quad
