#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flowlab/vec3.hpp"

namespace flowlab {

// Bounded open domain: a ball or an axis-aligned box.  Both have exact
// volumes and carry no boundary mass, so meas(domain) = meas(closure).
struct Domain {
  enum class Kind { Ball, Box };
  Kind kind = Kind::Ball;
  Vec3 center{};
  double radius = 1.0;   // ball
  Vec3 halfwidths{};     // box
  double exact_volume = 0.0;

  static Domain ball(const Vec3& center, double radius);
  static Domain box(const Vec3& center, const Vec3& halfwidths);

  // radius of the smallest origin-at-center ball containing the closure
  double circumscribed_radius() const;
};

// true iff x is strictly inside the domain
bool contains(const Domain& d, const Vec3& x);

// Euclidean distance from x to the closed domain (0 inside)
double distance_to(const Domain& d, const Vec3& x);

// Enclosing open ball K around the domain with margin 2*eps_max, so every
// mollification radius eps <= eps_max keeps supports inside K.
struct Enclosure {
  Domain domain;
  Vec3 ball_center{};
  double ball_radius = 0.0;
  double eps_max = 0.0;

  double margin() const { return ball_radius - domain.circumscribed_radius(); }
  Domain as_ball_domain() const { return Domain::ball(ball_center, ball_radius); }
};

Enclosure make_enclosure(const Domain& domain, double eps_max);

struct MeasurableSet {
  std::string label;
  std::function<bool(const Vec3&)> indicator;
  std::optional<double> exact_volume;
  // membership in the set dilated by delta; defaults to the plain indicator
  std::function<bool(const Vec3&, double)> contains_dilated;
  // uniform sampler on the set (k-th point for a given rng), when the shape
  // admits direct sampling; used only where noted
  std::function<Vec3(const class Rng&, std::uint64_t)> direct_sampler;

  static MeasurableSet ball(const std::string& label, const Vec3& center, double radius);
  static MeasurableSet box(const std::string& label, const Vec3& center, const Vec3& halfwidths);
};

struct MeasureEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

class Rng;

// k-th uniform point of the (region, seed) stream; 3 draws per point, no
// rejection, so the index range partitions deterministically.
Vec3 sample_point(const Domain& region, const Rng& rng, std::uint64_t k);

std::vector<Vec3> sample_uniform(const Domain& region, std::uint64_t n, std::uint64_t seed);
std::vector<Vec3> sample_uniform(const Enclosure& region, std::uint64_t n, std::uint64_t seed);

MeasureEstimate estimate_measure(const MeasurableSet& set, const Domain& region,
                                 std::uint64_t n, std::uint64_t seed);

}  // namespace flowlab
