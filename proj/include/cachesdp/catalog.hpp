#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "cachesdp/error.hpp"

namespace cachesdp {

struct ZipfCatalog {
  std::size_t file_count = 0;
  double exponent = 0.0;
  std::vector<double> pmf;

  std::size_t size() const { return pmf.size(); }
  double operator[](std::size_t n) const { return pmf[n]; }
};

// Q_n proportional to n^-beta, normalized by direct summation.
inline ZipfCatalog zipf_pmf(std::size_t n_files, double beta) {
  if (n_files == 0) throw ValidationError("file count must be >= 1");
  if (!(beta >= 0) || !std::isfinite(beta)) throw ValidationError("zipf exponent must be >= 0");
  ZipfCatalog c;
  c.file_count = n_files;
  c.exponent = beta;
  c.pmf.resize(n_files);
  for (std::size_t i = 0; i < n_files; ++i) c.pmf[i] = std::pow(static_cast<double>(i + 1), -beta);
  // Sum smallest terms first.
  double total = 0.0;
  for (std::size_t i = n_files; i-- > 0;) total += c.pmf[i];
  for (double& q : c.pmf) q /= total;
  return c;
}

inline void validate_pmf(const std::vector<double>& q, const std::string& what = "pmf") {
  if (q.empty()) throw ValidationError(what + " is empty");
  double s = 0.0;
  for (double v : q) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(what + " has an entry outside [0,1]");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9) throw ValidationError(what + " does not sum to 1");
}

struct CacheVector {
  std::vector<double> probs;
  std::size_t budget = 0;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t n) const { return probs[n]; }
  double total() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }
};

inline void check_budget(std::size_t n_files, std::size_t m) {
  if (n_files == 0) throw ValidationError("file count must be >= 1");
  if (m < 1 || m > n_files)
    throw ValidationError("cache size M = " + std::to_string(m) + " must satisfy 1 <= M <= N = " +
                          std::to_string(n_files));
}

// Box and budget constraints; tol is the slack allowed on sum(S) <= M.
inline void validate(const CacheVector& s, double tol = 1e-9) {
  check_budget(s.size(), s.budget);
  for (double v : s.probs)
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("caching probability outside [0,1]");
  if (s.total() > static_cast<double>(s.budget) + tol) throw ValidationError("cache vector exceeds budget");
}

inline CacheVector ucs_vector(std::size_t n_files, std::size_t m) {
  check_budget(n_files, m);
  return {std::vector<double>(n_files, static_cast<double>(m) / static_cast<double>(n_files)), m};
}

inline CacheVector pcs_vector(std::size_t n_files, std::size_t m) {
  check_budget(n_files, m);
  std::vector<double> s(n_files, 0.0);
  for (std::size_t i = 0; i < m; ++i) s[i] = 1.0;
  return {std::move(s), m};
}

}  // namespace cachesdp
