#include "flowlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flowlab/rng.hpp"
#include "flowlab/summation.hpp"

namespace flowlab {

Domain Domain::ball(const Vec3& center, double radius) {
  if (radius <= 0) throw std::invalid_argument("Domain::ball: radius must be positive");
  Domain d;
  d.kind = Kind::Ball;
  d.center = center;
  d.radius = radius;
  d.exact_volume = 4.0 / 3.0 * std::acos(-1.0) * radius * radius * radius;
  return d;
}

Domain Domain::box(const Vec3& center, const Vec3& halfwidths) {
  if (halfwidths.x <= 0 || halfwidths.y <= 0 || halfwidths.z <= 0)
    throw std::invalid_argument("Domain::box: halfwidths must be positive");
  Domain d;
  d.kind = Kind::Box;
  d.center = center;
  d.halfwidths = halfwidths;
  d.exact_volume = 8.0 * halfwidths.x * halfwidths.y * halfwidths.z;
  return d;
}

double Domain::circumscribed_radius() const {
  return kind == Kind::Ball ? radius : norm(halfwidths);
}

bool contains(const Domain& d, const Vec3& x) {
  const Vec3 r = x - d.center;
  if (d.kind == Domain::Kind::Ball) return norm2(r) < d.radius * d.radius;
  return std::abs(r.x) < d.halfwidths.x && std::abs(r.y) < d.halfwidths.y &&
         std::abs(r.z) < d.halfwidths.z;
}

double distance_to(const Domain& d, const Vec3& x) {
  const Vec3 r = x - d.center;
  if (d.kind == Domain::Kind::Ball) return std::max(0.0, norm(r) - d.radius);
  const double dx = std::max(0.0, std::abs(r.x) - d.halfwidths.x);
  const double dy = std::max(0.0, std::abs(r.y) - d.halfwidths.y);
  const double dz = std::max(0.0, std::abs(r.z) - d.halfwidths.z);
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Enclosure make_enclosure(const Domain& domain, double eps_max) {
  if (eps_max <= 0) throw std::invalid_argument("make_enclosure: eps_max must be positive");
  Enclosure e;
  e.domain = domain;
  e.ball_center = domain.center;
  e.ball_radius = domain.circumscribed_radius() + 2.0 * eps_max;
  e.eps_max = eps_max;
  return e;
}

MeasurableSet MeasurableSet::ball(const std::string& label, const Vec3& center, double radius) {
  MeasurableSet s;
  s.label = label;
  s.indicator = [center, radius](const Vec3& x) { return norm2(x - center) < radius * radius; };
  s.exact_volume = 4.0 / 3.0 * std::acos(-1.0) * radius * radius * radius;
  s.contains_dilated = [center, radius](const Vec3& x, double delta) {
    const double r = radius + delta;
    return norm2(x - center) < r * r;
  };
  s.direct_sampler = [center, radius](const Rng& rng, std::uint64_t k) {
    return sample_point(Domain::ball(center, radius), rng, k);
  };
  return s;
}

MeasurableSet MeasurableSet::box(const std::string& label, const Vec3& center, const Vec3& hw) {
  MeasurableSet s;
  s.label = label;
  s.indicator = [center, hw](const Vec3& x) {
    const Vec3 r = x - center;
    return std::abs(r.x) < hw.x && std::abs(r.y) < hw.y && std::abs(r.z) < hw.z;
  };
  s.exact_volume = 8.0 * hw.x * hw.y * hw.z;
  s.contains_dilated = [center, hw](const Vec3& x, double delta) {
    const Vec3 r = x - center;
    return std::abs(r.x) < hw.x + delta && std::abs(r.y) < hw.y + delta &&
           std::abs(r.z) < hw.z + delta;
  };
  s.direct_sampler = [center, hw](const Rng& rng, std::uint64_t k) {
    return sample_point(Domain::box(center, hw), rng, k);
  };
  return s;
}

Vec3 sample_point(const Domain& region, const Rng& rng, std::uint64_t k) {
  const double u0 = rng.uniform(3 * k);
  const double u1 = rng.uniform(3 * k + 1);
  const double u2 = rng.uniform(3 * k + 2);
  if (region.kind == Domain::Kind::Box) {
    return region.center + Vec3{(2.0 * u0 - 1.0) * region.halfwidths.x,
                                (2.0 * u1 - 1.0) * region.halfwidths.y,
                                (2.0 * u2 - 1.0) * region.halfwidths.z};
  }
  // uniform direction from (cos z, angle), radius by the r^3 law
  const double zc = 2.0 * u0 - 1.0;
  const double phi = 2.0 * std::acos(-1.0) * u1;
  const double rho = region.radius * std::cbrt(u2);
  const double sz = std::sqrt(std::max(0.0, 1.0 - zc * zc));
  return region.center + Vec3{rho * sz * std::cos(phi), rho * sz * std::sin(phi), rho * zc};
}

namespace {

std::vector<Vec3> sample_n(const Domain& region, std::uint64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_uniform: n must be >= 1");
  Rng rng(seed, Rng::stream_of("geometry.sample"));
  std::vector<Vec3> pts(n);
  for (std::uint64_t i = 0; i < n; ++i) pts[i] = sample_point(region, rng, i);
  return pts;
}

}  // namespace

std::vector<Vec3> sample_uniform(const Domain& region, std::uint64_t n, std::uint64_t seed) {
  return sample_n(region, n, seed);
}

std::vector<Vec3> sample_uniform(const Enclosure& region, std::uint64_t n, std::uint64_t seed) {
  return sample_n(region.as_ball_domain(), n, seed);
}

MeasureEstimate estimate_measure(const MeasurableSet& set, const Domain& region,
                                 std::uint64_t n, std::uint64_t seed) {
  if (n < 100) throw std::invalid_argument("estimate_measure: n must be >= 100");
  Rng rng(seed, Rng::stream_of("geometry.sample"));
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < n; ++i)
    if (set.indicator(sample_point(region, rng, i))) ++hits;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  MeasureEstimate est;
  est.value = p * region.exact_volume;
  est.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n)) * region.exact_volume;
  est.samples = n;
  est.seed = seed;
  return est;
}

}  // namespace flowlab
