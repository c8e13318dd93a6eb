#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flowlab/geometry.hpp"
#include "flowlab/vec3.hpp"

namespace flowlab {

// C^2 step profile: 1 on (-inf, lo], 0 on [hi, inf), quintic in between.
struct QuinticStep {
  double lo = 0.7;
  double hi = 0.9;
  double value(double r) const;
  double deriv(double r) const;
};

struct VelocityField {
  std::string name;
  Domain domain;  // Omega
  // both already include the zero extension outside Omega where applicable
  std::function<Vec3(double, const Vec3&)> velocity;
  std::function<double(double, const Vec3&)> divergence;
  double div_sup_bound = 0.0;   // analytic bound for sup_x |div v(t,x)|
  double sup_speed_bound = 0.0; // analytic bound for sup |v|
  bool divergence_free = false;
  bool vanishes_on_boundary = true;
  bool autonomous = true;
  std::string regularity_note;
  Domain support;  // v(t,.) vanishes outside this region for all t

  // fast path for mollification: v = e_component * f0(x0) f1(x1) f2(x2)
  struct Separable1D {
    int component = 0;
    std::array<std::function<double(double)>, 3> factors;
  };
  std::optional<Separable1D> separable;
};

// Built-in scenarios.  rotation and contraction live on the unit ball,
// rough_shear on the box (-1,1)^3; each vanishes at distance >= 0.1 from the
// boundary, so the zero extension is W^{1,1}_0-legitimate.
VelocityField rotation_field();
VelocityField contraction_field();
VelocityField rough_shear_field();
VelocityField zero_field(const Domain& domain);

Vec3 eval_zero_extended(const VelocityField& field, double t, const Vec3& x);

// normalized bump kernel of radius eps
struct Mollifier {
  double epsilon = 0.1;
  double normalizer_C = 0.0;

  double eta(const Vec3& y) const;
  Vec3 grad_eta(const Vec3& y) const;
};

// C = 1/(4*pi*int_0^1 r^2 e^{1/(r^2-1)} dr), independent of eps; computed by
// midpoint radial quadrature with a doubling refinement check at 1e-8.
double mollifier_normalizer(double eps, int quad_points);
Mollifier make_mollifier(double eps);

// Space convolution of the zero-extended field with the bump kernel, by
// product Gauss-Legendre quadrature on the cube circumscribing B_eps.
class MollifiedField {
 public:
  MollifiedField(VelocityField base, Mollifier mollifier, int order);

  Vec3 evaluate(double t, const Vec3& x) const;
  // divergence via grad-eta under the integral, not finite differences
  double divergence(double t, const Vec3& x) const;

  const VelocityField& base() const { return base_; }
  const Mollifier& mollifier() const { return moll_; }
  int quadrature_order() const { return order_; }

  // package as a field usable by the flow evaluator; note: not zero-extended
  // at the Omega boundary (its support is the eps-dilation of the base
  // support, still inside the enclosure)
  VelocityField as_field() const;

 private:
  VelocityField base_;
  Mollifier moll_;
  int order_ = 12;
  std::vector<double> offsets_;       // per-axis node offsets in [-eps, eps]
  std::vector<double> w_eta_;         // order^3 packed: weight * eta
  std::vector<Vec3> w_grad_;          // order^3 packed: weight * grad eta
  Domain support_;                    // base support dilated by eps
};

// pre: eps <= enclosure.eps_max (Eq.-style margin condition), order >= 8
MollifiedField mollify(const VelocityField& field, const Enclosure& enclosure,
                       double eps, int order = 12);

struct DivIntegralReport {
  double sampled = 0.0;  // trapezoid in time of sampled space maxima
  double bound = 0.0;    // |t-s| * div_sup_bound; use this for inequalities
};

DivIntegralReport div_l1_linf(const VelocityField& field, double s, double t,
                              int time_nodes, std::uint64_t space_samples,
                              std::uint64_t seed);

// compressibility constant exp(bound) for the interval [s,t]
double compressibility_constant(const VelocityField& field, double s, double t);

}  // namespace flowlab
