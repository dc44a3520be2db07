#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "cachesdp/error.hpp"

namespace cachesdp {

namespace detail {

// Gauss series of 2F1(a, b; c; x), stopped when a term falls below 1e-15 of the sum.
inline double hyp2f1_series(double a, double b, double c, double x, long max_terms = 100'000'000) {
  double term = 1.0;
  double sum = 1.0;
  for (long k = 0; k < max_terms; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x;
    sum += term;
    if (std::abs(term) <= 1e-15 * std::abs(sum)) return sum;
  }
  throw NumericalError("2F1 series did not converge at x = " + std::to_string(x), sum, std::abs(term),
                       static_cast<int>(std::min<long>(max_terms, 2'000'000'000)));
}

}  // namespace detail

// 2F1(1, b; c; x) for x < 1.
//   -0.5 <= x < 1: direct series.
//   c = b + 1, x < -2, b not an integer: 1/x continuation
//     2F1(1,b;b+1;x) = (pi b / sin(pi b)) (-x)^-b - (b/(1-b)) (-x)^-1 2F1(1,1-b;2-b;1/x).
//   otherwise: Pfaff, (1-x)^-1 2F1(1, c-b; c; x/(x-1)).
inline double hyp2f1_1b(double b, double c, double x) {
  if (!(c > 0)) throw DomainError("2F1(1,b;c;x) requires c > 0");
  if (std::isnan(x) || x >= 1.0) throw DomainError("2F1(1,b;c;x) requires x < 1, got " + std::to_string(x));
  if (x == 0.0) return 1.0;
  if (x >= -0.5) return detail::hyp2f1_series(1.0, b, c, x);
  const bool near_int = std::abs(b - std::round(b)) < 1e-9;
  if (x < -2.0 && std::abs(c - b - 1.0) < 1e-14 && !near_int) {
    const double y = -x;
    const double pib = std::numbers::pi * b;
    return pib / std::sin(pib) * std::pow(y, -b) -
           b / (1.0 - b) / y * detail::hyp2f1_series(1.0, 1.0 - b, 2.0 - b, 1.0 / x);
  }
  return detail::hyp2f1_series(1.0, c - b, c, x / (x - 1.0)) / (1.0 - x);
}

// Interference factor F(delta, alpha) = (2 delta/(alpha-2)) 2F1(1, 1-2/alpha; 2-2/alpha; -delta).
inline double f_delta_alpha(double delta, double alpha) {
  if (!(alpha > 2)) throw DomainError("F(delta, alpha) requires alpha > 2");
  if (!(delta >= 0)) throw DomainError("F(delta, alpha) requires delta >= 0");
  if (delta == 0.0) return 0.0;
  const double b = 1.0 - 2.0 / alpha;
  return 2.0 * delta / (alpha - 2.0) * hyp2f1_1b(b, b + 1.0, -delta);
}

}  // namespace cachesdp
