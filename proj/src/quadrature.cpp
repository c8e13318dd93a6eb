#include "flowlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace flowlab {

namespace {

// Legendre P_n and P_n' at x by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = (n == 0) ? 1.0 : (n == 1 ? x : p1);
  dp = (n == 0) ? 0.0 : n * (x * p1 - p0) / (x * x - 1.0);
}

QuadRule build_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  QuadRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      const double dx = -p / dp;
      x += dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre(n, x, p, dp);
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

const QuadRule& gauss_legendre(int n) {
  static std::map<int, QuadRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

QuadRule scaled_rule(const QuadRule& rule, double a, double b) {
  QuadRule out;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  out.nodes.reserve(rule.nodes.size());
  out.weights.reserve(rule.weights.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    out.nodes.push_back(mid + half * rule.nodes[i]);
    out.weights.push_back(half * rule.weights[i]);
  }
  return out;
}

}  // namespace flowlab
