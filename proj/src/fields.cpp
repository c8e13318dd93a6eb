#include "flowlab/fields.hpp"

#include <cmath>
#include <stdexcept>

#include "flowlab/quadrature.hpp"
#include "flowlab/rng.hpp"

namespace flowlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// sup_r r*phi(r) for the quintic profile with knots 0.7/0.9 (attained near
// r = 0.7214); padded up in the last digits
constexpr double kRotSupSpeed = 0.71392026085;
// sup_r |3 phi(r) + r phi'(r)| (attained near r = 0.8121), padded up
constexpr double kContractionDivBound = 6.2291398530;
// sup_u |phi1(u) sqrt(|u|)|, attained just past the first knot, padded up
constexpr double kShearAmp = 0.84240174235;
// sup |theta'| = 30/(4*0.2) * max u^2(1-u)^2 = 9.375 exactly
constexpr double kShearDivBound = 9.375 * kShearAmp;

}  // namespace

double QuinticStep::value(double r) const {
  if (r <= lo) return 1.0;
  if (r >= hi) return 0.0;
  const double u = (r - lo) / (hi - lo);
  return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double QuinticStep::deriv(double r) const {
  if (r <= lo || r >= hi) return 0.0;
  const double u = (r - lo) / (hi - lo);
  const double w = 1.0 - u;
  return -30.0 * u * u * w * w / (hi - lo);
}

VelocityField rotation_field() {
  VelocityField f;
  f.name = "rotation";
  f.domain = Domain::ball(Vec3{0, 0, 0}, 1.0);
  f.support = Domain::ball(Vec3{0, 0, 0}, 0.9);
  const QuinticStep step;
  f.velocity = [step, domain = f.domain](double, const Vec3& x) -> Vec3 {
    if (!contains(domain, x)) return Vec3{};
    const double phi = step.value(x.norm());
    return Vec3{-phi * x.y, phi * x.x, 0.0};
  };
  f.divergence = [](double, const Vec3&) { return 0.0; };
  f.div_sup_bound = 0.0;
  f.sup_speed_bound = kRotSupSpeed;
  f.divergence_free = true;
  f.vanishes_on_boundary = true;
  f.autonomous = true;
  f.regularity_note = "smooth (C^2), divergence free, rigid rotation for r <= 0.7";
  return f;
}

VelocityField contraction_field() {
  VelocityField f;
  f.name = "contraction";
  f.domain = Domain::ball(Vec3{0, 0, 0}, 1.0);
  f.support = Domain::ball(Vec3{0, 0, 0}, 0.9);
  const QuinticStep step;
  f.velocity = [step, domain = f.domain](double, const Vec3& x) -> Vec3 {
    if (!contains(domain, x)) return Vec3{};
    const double phi = step.value(x.norm());
    return Vec3{-phi * x.x, -phi * x.y, -phi * x.z};
  };
  f.divergence = [step, domain = f.domain](double, const Vec3& x) {
    if (!contains(domain, x)) return 0.0;
    const double r = x.norm();
    return -(3.0 * step.value(r) + r * step.deriv(r));
  };
  f.div_sup_bound = kContractionDivBound;
  f.sup_speed_bound = kRotSupSpeed;
  f.divergence_free = false;
  f.vanishes_on_boundary = true;
  f.autonomous = true;
  f.regularity_note = "smooth (C^2), uniform contraction toward 0 for r <= 0.7";
  return f;
}

VelocityField rough_shear_field() {
  VelocityField f;
  f.name = "rough_shear";
  f.domain = Domain::box(Vec3{0, 0, 0}, Vec3{1, 1, 1});
  f.support = Domain::box(Vec3{0, 0, 0}, Vec3{0.9, 0.9, 0.9});
  const QuinticStep step;
  auto bump = [step](double u) { return step.value(std::fabs(u)); };
  auto bump_deriv = [step](double u) {
    const double d = step.deriv(std::fabs(u));
    return u < 0.0 ? -d : d;
  };
  auto shear_profile = [bump](double u) {
    return bump(u) * std::sqrt(std::fabs(u));
  };
  f.velocity = [bump, shear_profile, domain = f.domain](double,
                                                        const Vec3& x) -> Vec3 {
    if (!contains(domain, x)) return Vec3{};
    return Vec3{bump(x.x) * shear_profile(x.y) * bump(x.z), 0.0, 0.0};
  };
  f.divergence = [bump_deriv, shear_profile, bump,
                  domain = f.domain](double, const Vec3& x) {
    if (!contains(domain, x)) return 0.0;
    return bump_deriv(x.x) * shear_profile(x.y) * bump(x.z);
  };
  f.div_sup_bound = kShearDivBound;
  f.sup_speed_bound = kShearAmp;
  f.divergence_free = false;
  f.vanishes_on_boundary = true;
  f.autonomous = true;
  f.regularity_note =
      "W^{1,1}: d(v_1)/d(x_2) ~ |x_2|^{-1/2} near the plane x_2 = 0";
  VelocityField::Separable1D sep;
  sep.component = 0;
  sep.factors = {bump, shear_profile, bump};
  f.separable = sep;
  return f;
}

VelocityField zero_field(const Domain& domain) {
  VelocityField f;
  f.name = "zero";
  f.domain = domain;
  f.support = domain;
  f.velocity = [](double, const Vec3&) { return Vec3{}; };
  f.divergence = [](double, const Vec3&) { return 0.0; };
  f.div_sup_bound = 0.0;
  f.sup_speed_bound = 0.0;
  f.divergence_free = true;
  f.vanishes_on_boundary = true;
  f.autonomous = true;
  f.regularity_note = "identically zero";
  return f;
}

Vec3 eval_zero_extended(const VelocityField& field, double t, const Vec3& x) {
  return field.velocity(t, x);
}

double Mollifier::eta(const Vec3& y) const {
  const double q = y.norm2() / (epsilon * epsilon);
  if (q >= 1.0) return 0.0;
  return normalizer_C / (epsilon * epsilon * epsilon) * std::exp(1.0 / (q - 1.0));
}

Vec3 Mollifier::grad_eta(const Vec3& y) const {
  const double q = y.norm2() / (epsilon * epsilon);
  if (q >= 1.0) return Vec3{};
  const double e = eta(y);
  const double d = q - 1.0;
  const double factor = -2.0 / (epsilon * epsilon * d * d);
  return Vec3{factor * e * y.x, factor * e * y.y, factor * e * y.z};
}

double mollifier_normalizer(double eps, int quad_points) {
  if (eps <= 0.0) throw std::invalid_argument("mollifier radius must be positive");
  if (quad_points < 64) {
    throw std::invalid_argument("mollifier normalizer needs at least 64 points");
  }
  auto radial = [](int m) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      const double r = (i + 0.5) / m;
      acc += r * r * std::exp(1.0 / (r * r - 1.0));
    }
    return acc / m;
  };
  const double coarse = radial(quad_points);
  const double fine = radial(2 * quad_points);
  if (std::fabs(coarse - fine) > 1e-8 * std::fabs(fine)) {
    throw std::runtime_error("mollifier normalizer quadrature did not settle");
  }
  // C/eps^3 * eta-profile integrates to one in scaled coordinates, so the
  // eps-independent constant is all we need
  return 1.0 / (4.0 * kPi * fine);
}

Mollifier make_mollifier(double eps) {
  Mollifier m;
  m.epsilon = eps;
  m.normalizer_C = mollifier_normalizer(eps, 4096);
  return m;
}

MollifiedField::MollifiedField(VelocityField base, Mollifier mollifier, int order)
    : base_(std::move(base)), moll_(mollifier), order_(order) {
  if (order_ < 8) throw std::invalid_argument("mollification order must be >= 8");
  const QuadRule rule = scaled_rule(gauss_legendre(order_), -moll_.epsilon,
                                    moll_.epsilon);
  offsets_ = rule.nodes;
  w_eta_.resize(static_cast<std::size_t>(order_) * order_ * order_);
  w_grad_.resize(w_eta_.size());
  std::size_t idx = 0;
  double mass = 0.0;
  for (int i = 0; i < order_; ++i) {
    for (int j = 0; j < order_; ++j) {
      for (int k = 0; k < order_; ++k, ++idx) {
        const Vec3 y{rule.nodes[i], rule.nodes[j], rule.nodes[k]};
        const double w = rule.weights[i] * rule.weights[j] * rule.weights[k];
        // the kernel vanishes identically outside B_eps, so restricting the
        // cube rule to the ball happens through these precomputed values
        w_eta_[idx] = w * moll_.eta(y);
        w_grad_[idx] = w * moll_.grad_eta(y);
        mass += w_eta_[idx];
      }
    }
  }
  // rescale so the discrete kernel has unit mass exactly; the convolution
  // then reproduces constants to machine precision and stays a true average
  const double scale = 1.0 / mass;
  for (std::size_t m = 0; m < w_eta_.size(); ++m) {
    w_eta_[m] *= scale;
    w_grad_[m] *= scale;
  }
  // matching first-moment fix for the gradient table: the discrete moment
  // matrix sum_k w_grad[k] (x) y_k is -c I by the symmetry of the product
  // rule, so one scalar restores the continuum value -I and the divergence
  // of linear fields becomes exact
  double moment = 0.0;
  idx = 0;
  for (int i = 0; i < order_; ++i) {
    for (int j = 0; j < order_; ++j) {
      for (int k = 0; k < order_; ++k, ++idx) {
        const Vec3 y{rule.nodes[i], rule.nodes[j], rule.nodes[k]};
        moment += dot(w_grad_[idx], y);
      }
    }
  }
  const double grad_scale = -3.0 / moment;
  for (auto& g : w_grad_) g *= grad_scale;
  support_ = base_.support;
  if (support_.kind == Domain::Kind::Ball) {
    support_.radius += moll_.epsilon;
  } else {
    support_.halfwidths = support_.halfwidths + Vec3{moll_.epsilon, moll_.epsilon,
                                                     moll_.epsilon};
  }
}

Vec3 MollifiedField::evaluate(double t, const Vec3& x) const {
  // exact zero wherever the eps-ball around x misses both Omega and the
  // support of the base field
  if (distance_to(base_.domain, x) >= moll_.epsilon) return Vec3{};
  if (distance_to(base_.support, x) >= moll_.epsilon) return Vec3{};
  const int n = order_;
  if (base_.separable && base_.autonomous) {
    const auto& sep = *base_.separable;
    // velocity factors evaluated once per axis instead of once per node
    std::vector<double> f0(n), f1(n), f2(n);
    for (int i = 0; i < n; ++i) {
      f0[i] = sep.factors[0](x.x - offsets_[i]);
      f1[i] = sep.factors[1](x.y - offsets_[i]);
      f2[i] = sep.factors[2](x.z - offsets_[i]);
    }
    double acc = 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double fij = f0[i] * f1[j];
        if (fij == 0.0) {
          idx += static_cast<std::size_t>(n);
          continue;
        }
        double inner = 0.0;
        for (int k = 0; k < n; ++k, ++idx) {
          inner += w_eta_[idx] * f2[k];
        }
        acc += fij * inner;
      }
    }
    Vec3 out{};
    out[sep.component] = acc;
    return out;
  }
  Vec3 acc{};
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k, ++idx) {
        const Vec3 y{offsets_[i], offsets_[j], offsets_[k]};
        const Vec3 v = base_.velocity(t, x - y);
        acc = acc + w_eta_[idx] * v;
      }
    }
  }
  return acc;
}

double MollifiedField::divergence(double t, const Vec3& x) const {
  if (distance_to(base_.domain, x) >= moll_.epsilon) return 0.0;
  if (distance_to(base_.support, x) >= moll_.epsilon) return 0.0;
  const int n = order_;
  if (base_.separable && base_.autonomous) {
    const auto& sep = *base_.separable;
    std::vector<double> f0(n), f1(n), f2(n);
    for (int i = 0; i < n; ++i) {
      f0[i] = sep.factors[0](x.x - offsets_[i]);
      f1[i] = sep.factors[1](x.y - offsets_[i]);
      f2[i] = sep.factors[2](x.z - offsets_[i]);
    }
    double acc = 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double fij = f0[i] * f1[j];
        if (fij == 0.0) {
          idx += static_cast<std::size_t>(n);
          continue;
        }
        double inner = 0.0;
        for (int k = 0; k < n; ++k, ++idx) {
          inner += w_grad_[idx][sep.component] * f2[k];
        }
        acc += fij * inner;
      }
    }
    return acc;
  }
  double acc = 0.0;
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k, ++idx) {
        const Vec3 y{offsets_[i], offsets_[j], offsets_[k]};
        const Vec3 v = base_.velocity(t, x - y);
        acc += dot(w_grad_[idx], v);
      }
    }
  }
  return acc;
}

VelocityField MollifiedField::as_field() const {
  auto self = std::make_shared<MollifiedField>(*this);
  VelocityField f;
  f.name = base_.name + "+mollified";
  f.domain = base_.domain;
  f.support = support_;
  f.velocity = [self](double t, const Vec3& x) { return self->evaluate(t, x); };
  f.divergence = [self](double t, const Vec3& x) {
    return self->divergence(t, x);
  };
  // convolution with a unit-mass kernel cannot increase either sup bound
  f.div_sup_bound = base_.div_sup_bound;
  f.sup_speed_bound = base_.sup_speed_bound;
  f.divergence_free = base_.divergence_free;
  f.autonomous = base_.autonomous;
  f.regularity_note = "mollified: " + base_.regularity_note;
  // still compactly supported inside Omega as long as the dilated support
  // stays there; the scenarios keep a 0.1 margin
  const Vec3 probe{support_.kind == Domain::Kind::Ball
                       ? support_.radius
                       : support_.halfwidths.x,
                   0, 0};
  f.vanishes_on_boundary = contains(base_.domain, support_.center + probe);
  return f;
}

MollifiedField mollify(const VelocityField& field, const Enclosure& enclosure,
                       double eps, int order) {
  if (eps <= 0.0) throw std::invalid_argument("mollification radius must be positive");
  if (eps > enclosure.eps_max) {
    throw std::invalid_argument(
        "mollification radius exceeds the enclosure margin");
  }
  return MollifiedField(field, make_mollifier(eps), order);
}

DivIntegralReport div_l1_linf(const VelocityField& field, double s, double t,
                              int time_nodes, std::uint64_t space_samples,
                              std::uint64_t seed) {
  if (time_nodes < 2) throw std::invalid_argument("need at least two time nodes");
  if (space_samples < 1) throw std::invalid_argument("need at least one sample");
  const double a = std::min(s, t);
  const double b = std::max(s, t);
  Rng rng(seed, Rng::stream_of("fields.div_l1_linf"));
  std::vector<Vec3> points(space_samples);
  for (std::uint64_t i = 0; i < space_samples; ++i) {
    points[i] = sample_point(field.domain, rng, i);
  }
  std::vector<double> maxima(time_nodes, 0.0);
  for (int j = 0; j < time_nodes; ++j) {
    const double tj = a + (b - a) * j / (time_nodes - 1);
    double m = 0.0;
    for (const Vec3& p : points) {
      m = std::max(m, std::fabs(field.divergence(tj, p)));
    }
    maxima[j] = m;
  }
  double integral = 0.0;
  for (int j = 0; j + 1 < time_nodes; ++j) {
    integral += 0.5 * (maxima[j] + maxima[j + 1]) * (b - a) / (time_nodes - 1);
  }
  DivIntegralReport report;
  report.sampled = integral;
  report.bound = (b - a) * field.div_sup_bound;
  return report;
}

double compressibility_constant(const VelocityField& field, double s, double t) {
  return std::exp(std::fabs(t - s) * field.div_sup_bound);
}

}  // namespace flowlab
