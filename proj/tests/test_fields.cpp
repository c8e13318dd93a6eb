#include <cmath>
#include <vector>

#include "doctest.h"
#include "flowlab/fields.hpp"
#include "flowlab/geometry.hpp"
#include "flowlab/rng.hpp"

using namespace flowlab;

namespace {

// brute-force radial Riemann value, recomputed independently before the build
constexpr double kNormalizerRef = 2.26711673960833;
constexpr double kContractionDivRef = 6.22913985264137;
constexpr double kShearDivRef = 7.89751633423407;
constexpr double kShearSpeedRef = 0.8424017423183;
constexpr double kRotSpeedRef = 0.713920260806431;

VelocityField synthetic_window(std::function<Vec3(const Vec3&)> v) {
  VelocityField f;
  f.name = "synthetic";
  f.domain = Domain::ball({0, 0, 0}, 10.0);
  f.support = f.domain;
  f.velocity = [v = std::move(v)](double, const Vec3& x) { return v(x); };
  f.divergence = [](double, const Vec3&) { return 0.0; };
  f.sup_speed_bound = 100.0;
  f.autonomous = true;
  return f;
}

}  // namespace

TEST_SUITE_BEGIN("fields");

TEST_CASE("zero extension of the scenario fields") {
  const auto rot = rotation_field();
  const Vec3 outside{1.5, 0, 0};
  const Vec3 v_out = eval_zero_extended(rot, 0.0, outside);
  CHECK(v_out.x == 0.0);
  CHECK(v_out.y == 0.0);
  CHECK(v_out.z == 0.0);

  const Vec3 v_core = eval_zero_extended(rot, 3.7, {0.5, 0, 0});
  CHECK(v_core.x == doctest::Approx(0.0));
  CHECK(v_core.y == doctest::Approx(0.5));
  CHECK(v_core.z == doctest::Approx(0.0));

  const auto con = contraction_field();
  const Vec3 v_con = eval_zero_extended(con, 0.0, {0.1, 0.1, 0.1});
  CHECK(v_con.x == doctest::Approx(-0.1));
  CHECK(v_con.y == doctest::Approx(-0.1));
  CHECK(v_con.z == doctest::Approx(-0.1));
}

TEST_CASE("analytic bounds match the independent one dimensional scans") {
  const auto rot = rotation_field();
  CHECK(rot.div_sup_bound == 0.0);
  CHECK(rot.divergence_free);
  CHECK(rot.sup_speed_bound >= kRotSpeedRef);
  CHECK(rot.sup_speed_bound == doctest::Approx(kRotSpeedRef).epsilon(1e-8));

  const auto con = contraction_field();
  CHECK(con.div_sup_bound >= kContractionDivRef);
  CHECK(con.div_sup_bound == doctest::Approx(kContractionDivRef).epsilon(1e-8));
  CHECK(con.sup_speed_bound >= kRotSpeedRef);

  const auto shear = rough_shear_field();
  CHECK(shear.div_sup_bound >= kShearDivRef);
  CHECK(shear.div_sup_bound == doctest::Approx(kShearDivRef).epsilon(1e-8));
  CHECK(shear.sup_speed_bound >= kShearSpeedRef);
  CHECK(shear.sup_speed_bound == doctest::Approx(kShearSpeedRef).epsilon(1e-8));
}

TEST_CASE("sampled divergence maxima nearly attain the rough shear bound") {
  const auto shear = rough_shear_field();
  const auto pts = sample_uniform(shear.domain, 100000, 1);
  double best = 0.0;
  for (const auto& p : pts) {
    best = std::max(best, std::fabs(shear.divergence(0.0, p)));
  }
  CHECK(best <= shear.div_sup_bound);
  CHECK(best >= 0.95 * shear.div_sup_bound);
}

TEST_CASE("divergence stays below the declared bound everywhere sampled") {
  for (const auto& f : {contraction_field(), rough_shear_field()}) {
    for (const auto& p : sample_uniform(f.domain, 20000, 2)) {
      CHECK(std::fabs(f.divergence(0.0, p)) <= f.div_sup_bound);
    }
  }
}

TEST_CASE("central difference divergence consistency with halving ratio") {
  auto rms_error = [](const VelocityField& f, const std::vector<Vec3>& pts,
                      double h) {
    double acc = 0.0;
    for (const auto& p : pts) {
      double fd = 0.0;
      for (int c = 0; c < 3; ++c) {
        Vec3 hi = p, lo = p;
        hi[c] += h;
        lo[c] -= h;
        fd += (f.velocity(0.0, hi)[c] - f.velocity(0.0, lo)[c]) / (2.0 * h);
      }
      const double err = fd - f.divergence(0.0, p);
      acc += err * err;
    }
    return std::sqrt(acc / pts.size());
  };

  SUBCASE("contraction") {
    const auto f = contraction_field();
    std::vector<Vec3> pts;
    Rng rng(3, Rng::stream_of("test.divconsistency"));
    for (std::uint64_t k = 0; pts.size() < 1000; ++k) {
      const Vec3 p = sample_point(f.domain, rng, k);
      const double r = p.norm();
      // keep clear of the profile knots where the third derivative jumps
      if (std::fabs(r - 0.7) < 0.05 || std::fabs(r - 0.9) < 0.05 || r > 0.95) {
        continue;
      }
      pts.push_back(p);
    }
    const double e1 = rms_error(f, pts, 2e-3);
    const double e2 = rms_error(f, pts, 1e-3);
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 4.5);
  }

  SUBCASE("rough shear away from the singular plane") {
    const auto f = rough_shear_field();
    std::vector<Vec3> pts;
    Rng rng(4, Rng::stream_of("test.divconsistency"));
    for (std::uint64_t k = 0; pts.size() < 1000; ++k) {
      const Vec3 p = sample_point(f.domain, rng, k);
      bool ok = std::fabs(p.y) > 0.1;
      for (int c = 0; c < 3 && ok; ++c) {
        const double a = std::fabs(p[c]);
        if (std::fabs(a - 0.7) < 0.05 || std::fabs(a - 0.9) < 0.05 || a > 0.95) {
          ok = false;
        }
      }
      if (!ok) continue;
      pts.push_back(p);
    }
    const double e1 = rms_error(f, pts, 2e-3);
    const double e2 = rms_error(f, pts, 1e-3);
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 4.5);
  }

  SUBCASE("rotation divergence vanishes identically") {
    const auto f = rotation_field();
    for (const auto& p : sample_uniform(f.domain, 200, 5)) {
      double fd = 0.0;
      const double h = 1e-4;
      for (int c = 0; c < 3; ++c) {
        Vec3 hi = p, lo = p;
        hi[c] += h;
        lo[c] -= h;
        fd += (f.velocity(0.0, hi)[c] - f.velocity(0.0, lo)[c]) / (2.0 * h);
      }
      if (distance_to(f.domain, Vec3{p.x + h, p.y + h, p.z + h}) > 0.0) continue;
      CHECK(std::fabs(fd) < 1e-5);
      CHECK(f.divergence(0.0, p) == 0.0);
    }
  }
}

TEST_CASE("normalizer matches the brute force radial sum") {
  const double c1 = mollifier_normalizer(0.05, 4096);
  const double c2 = mollifier_normalizer(0.2, 4096);
  CHECK(c1 == c2);
  CHECK(c1 == doctest::Approx(kNormalizerRef).epsilon(1e-6));
  // definition closes: C * 4 pi * integral = 1
  double integral = 0.0;
  const int m = 1 << 20;
  for (int i = 0; i < m; ++i) {
    const double r = (i + 0.5) / m;
    integral += r * r * std::exp(1.0 / (r * r - 1.0));
  }
  integral /= m;
  CHECK(c1 * 4.0 * M_PI * integral == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS(mollifier_normalizer(0.1, 8));
  CHECK_THROWS(mollifier_normalizer(-0.1, 4096));
}

TEST_CASE("mollifier kernel shape") {
  const Mollifier m = make_mollifier(0.1);
  CHECK(m.eta({0.11, 0, 0}) == 0.0);
  CHECK(m.eta({0.1, 0, 0}) == 0.0);
  CHECK(m.eta({0, 0, 0}) == doctest::Approx(kNormalizerRef * std::exp(-1.0) / 1e-3));
  // gradient points inward and matches a finite difference
  const Vec3 y{0.03, -0.02, 0.01};
  const Vec3 g = m.grad_eta(y);
  const double h = 1e-7;
  for (int c = 0; c < 3; ++c) {
    Vec3 hi = y, lo = y;
    hi[c] += h;
    lo[c] -= h;
    const double fd = (m.eta(hi) - m.eta(lo)) / (2.0 * h);
    CHECK(g[c] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("mollification reproduces constants and linear maps") {
  const Domain big = Domain::ball({0, 0, 0}, 10.0);
  const Enclosure enc = make_enclosure(big, 0.1);

  const Vec3 c{0.3, -1.2, 0.7};
  const auto constant = synthetic_window([c](const Vec3&) { return c; });
  const MollifiedField mc = mollify(constant, enc, 0.1, 12);
  for (const Vec3& x : {Vec3{0, 0, 0}, Vec3{0.4, 0.2, -0.6}}) {
    const Vec3 v = mc.evaluate(0.0, x);
    CHECK(v.x == doctest::Approx(c.x).epsilon(1e-8));
    CHECK(v.y == doctest::Approx(c.y).epsilon(1e-8));
    CHECK(v.z == doctest::Approx(c.z).epsilon(1e-8));
  }

  const auto linear = synthetic_window([](const Vec3& x) {
    return Vec3{2.0 * x.x - x.y, 0.5 * x.y + x.z, -x.x + 3.0 * x.z};
  });
  const MollifiedField ml = mollify(linear, enc, 0.1, 12);
  for (const Vec3& x : {Vec3{0.1, 0.2, 0.3}, Vec3{-0.5, 0.4, 0.0}}) {
    const Vec3 want = linear.velocity(0.0, x);
    const Vec3 got = ml.evaluate(0.0, x);
    CHECK(got.x == doctest::Approx(want.x).epsilon(1e-10));
    CHECK(got.y == doctest::Approx(want.y).epsilon(1e-10));
    CHECK(got.z == doctest::Approx(want.z).epsilon(1e-10));
  }
  // trace of the linear map; exact thanks to the moment-matched gradient table
  CHECK(ml.divergence(0.0, {0.2, -0.1, 0.4}) == doctest::Approx(5.5).epsilon(1e-10));

  const auto zero = zero_field(big);
  const MollifiedField mz = mollify(zero, enc, 0.05, 12);
  const Vec3 vz = mz.evaluate(0.0, {0.3, 0.3, 0.3});
  CHECK(vz.x == 0.0);
  CHECK(vz.y == 0.0);
  CHECK(vz.z == 0.0);
}

TEST_CASE("mollification radius gate") {
  const auto rot = rotation_field();
  const Enclosure enc = make_enclosure(rot.domain, 0.1);
  CHECK_THROWS(mollify(rot, enc, 0.2, 12));
  CHECK_THROWS(mollify(rot, enc, 0.05, 4));
  CHECK_NOTHROW(mollify(rot, enc, 0.1, 8));
}

TEST_CASE("mollified fields vanish exactly beyond the support margin") {
  for (const auto& base : {rotation_field(), rough_shear_field()}) {
    const Enclosure enc = make_enclosure(base.domain, 0.1);
    for (double eps : {0.1, 0.05, 0.025}) {
      const MollifiedField mf = mollify(base, enc, eps, 8);
      Rng rng(9, Rng::stream_of("test.support"));
      const Domain K = enc.as_ball_domain();
      std::size_t found = 0;
      for (std::uint64_t k = 0; found < 1000; ++k) {
        const Vec3 p = sample_point(K, rng, k);
        if (distance_to(base.domain, p) <= eps) continue;
        ++found;
        const Vec3 v = mf.evaluate(0.0, p);
        CHECK(v.x == 0.0);
        CHECK(v.y == 0.0);
        CHECK(v.z == 0.0);
        CHECK(mf.divergence(0.0, p) == 0.0);
      }
    }
  }
}

TEST_CASE("mollified divergence agrees with differenced evaluation") {
  const auto shear = rough_shear_field();
  const Enclosure enc = make_enclosure(shear.domain, 0.1);
  const MollifiedField mf = mollify(shear, enc, 0.05, 12);
  const double h = 5e-4;
  for (const Vec3& x : {Vec3{0.5, 0.3, 0.1}, Vec3{-0.2, 0.05, -0.4}}) {
    double fd = 0.0;
    for (int c = 0; c < 3; ++c) {
      Vec3 hi = x, lo = x;
      hi[c] += h;
      lo[c] -= h;
      fd += (mf.evaluate(0.0, hi)[c] - mf.evaluate(0.0, lo)[c]) / (2.0 * h);
    }
    CHECK(mf.divergence(0.0, x) == doctest::Approx(fd).epsilon(5e-4).scale(1.0));
  }
}

TEST_CASE("separable fast path matches the generic quadrature") {
  auto shear = rough_shear_field();
  const Enclosure enc = make_enclosure(shear.domain, 0.1);
  const MollifiedField fast = mollify(shear, enc, 0.05, 10);
  auto generic = shear;
  generic.separable.reset();
  const MollifiedField slow = mollify(generic, enc, 0.05, 10);
  for (const Vec3& x : {Vec3{0.5, 0.3, 0.1}, Vec3{0.81, -0.02, 0.55},
                        Vec3{-0.66, 0.7, -0.1}}) {
    CHECK(fast.evaluate(0.0, x).x ==
          doctest::Approx(slow.evaluate(0.0, x).x).epsilon(1e-12));
    CHECK(fast.divergence(0.0, x) ==
          doctest::Approx(slow.divergence(0.0, x)).epsilon(1e-12));
  }
}

TEST_CASE("interval divergence report") {
  const auto rot = rotation_field();
  const auto r = div_l1_linf(rot, 0.0, 2.0, 9, 500, 1);
  CHECK(r.sampled == 0.0);
  CHECK(r.bound == 0.0);
  CHECK(compressibility_constant(rot, 0.0, 2.0) == 1.0);

  const auto con = contraction_field();
  const auto rc = div_l1_linf(con, 0.0, 1.0, 9, 2000, 1);
  CHECK(rc.bound == doctest::Approx(con.div_sup_bound));
  CHECK(rc.sampled <= rc.bound);
  CHECK(rc.sampled >= 0.9 * rc.bound);

  const auto re = div_l1_linf(con, 0.5, 0.5, 2, 10, 1);
  CHECK(re.sampled == 0.0);
  CHECK(re.bound == 0.0);
}

TEST_SUITE_END();
