#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace flowlab {

// Deterministic pairwise summation over a fixed index range.  Used for every
// Monte Carlo reduction so that results do not depend on scheduling.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

inline double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

// Standard error of the mean, sqrt(Var/n) with the 1/n population variance
// (MC convention; the n vs n-1 distinction is immaterial at our sample sizes).
inline double std_error_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
  const double var = pairwise_sum(sq) / static_cast<double>(v.size());
  return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace flowlab
