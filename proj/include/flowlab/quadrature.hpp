#pragma once

#include <vector>

namespace flowlab {

struct QuadRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

// n-point Gauss-Legendre rule on [-1,1], computed by Newton iteration on the
// Legendre polynomial from the Chebyshev initial guess.  Deterministic.
const QuadRule& gauss_legendre(int n);

// Maps a rule to [a,b]: node_i -> (a+b)/2 + (b-a)/2 * x_i, weight scaled by (b-a)/2.
QuadRule scaled_rule(const QuadRule& rule, double a, double b);

}  // namespace flowlab
