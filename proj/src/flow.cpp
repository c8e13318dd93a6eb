#include "flowlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flowlab/csv.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/summation.hpp"

namespace flowlab {

namespace {

using NodeObserver = std::function<void(double, const Vec3&, double)>;

[[noreturn]] void report_escape(const FlowEvaluator& flow, double r,
                                const Vec3& p, double dist, double tol) {
  std::ostringstream msg;
  msg << "trajectory left the enclosure: field=" << flow.field.name
      << " time=" << r << " position=(" << p.x << "," << p.y << "," << p.z
      << ") distance=" << dist << " tolerance=" << tol;
  throw TrajectoryEscape(msg.str(), r, p);
}

// One uniform-grid RK4 leg from time a to time b.  Positions and the running
// divergence integral are updated in place; observe (if set) fires at every
// node after the first.
void integrate_leg(const FlowEvaluator& flow, double a, double b, Vec3& x,
                   double& jac, bool want_jac, const NodeObserver& observe) {
  if (a == b) return;
  const auto& f = flow.field;
  const Domain K = flow.enclosure.as_ball_domain();
  const double tol = 10.0 * flow.step_size * f.sup_speed_bound;
  const double span = b - a;
  const auto nsteps =
      static_cast<std::int64_t>(std::ceil(std::fabs(span) / flow.step_size));
  const double h = span / static_cast<double>(nsteps);

  // points where the field and its divergence vanish never move; for
  // autonomous fields every RK4 stage is exactly zero there, so skipping the
  // loop reproduces the looped arithmetic bit for bit
  if (f.autonomous && !observe) {
    const Vec3 v0 = f.velocity(a, x);
    if (v0.x == 0.0 && v0.y == 0.0 && v0.z == 0.0 &&
        (!want_jac || f.divergence(a, x) == 0.0)) {
      return;
    }
  }

  double div_prev = want_jac ? f.divergence(a, x) : 0.0;
  for (std::int64_t i = 0; i < nsteps; ++i) {
    const double r = a + h * static_cast<double>(i);
    const double r_next = (i + 1 == nsteps) ? b : a + h * static_cast<double>(i + 1);
    const Vec3 k1 = f.velocity(r, x);
    const Vec3 k2 = f.velocity(r + 0.5 * h, x + (0.5 * h) * k1);
    const Vec3 k3 = f.velocity(r + 0.5 * h, x + (0.5 * h) * k2);
    const Vec3 k4 = f.velocity(r_next, x + h * k3);
    x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double dist = distance_to(K, x);
    if (dist > tol) report_escape(flow, r_next, x, dist, tol);
    if (want_jac) {
      const double div_next = f.divergence(r_next, x);
      jac += 0.5 * (r_next - r) * (div_prev + div_next);
      div_prev = div_next;
    }
    if (observe) observe(r_next, x, jac);
  }
}

FlowPoint run(const FlowEvaluator& flow, double t, const Vec3& x0, double s,
              bool want_jac, const NodeObserver& observe) {
  const Domain K = flow.enclosure.as_ball_domain();
  const double tol = 10.0 * flow.step_size * flow.field.sup_speed_bound;
  const double dist0 = distance_to(K, x0);
  if (dist0 > tol) report_escape(flow, t, x0, dist0, tol);
  Vec3 x = x0;
  double jac = 0.0;
  if (observe) observe(t, x, jac);
  integrate_leg(flow, t, s, x, jac, want_jac, observe);
  return FlowPoint{x, jac};
}

}  // namespace

FlowEvaluator make_flow(VelocityField field, Enclosure enclosure,
                        double step_size) {
  if (step_size <= 0.0) {
    throw std::invalid_argument("flow step size must be positive");
  }
  return FlowEvaluator{std::move(field), enclosure, step_size};
}

TrajectoryRecord advect(const FlowEvaluator& flow, double t, const Vec3& x0,
                        double s) {
  TrajectoryRecord rec;
  run(flow, t, x0, s, /*want_jac=*/true,
      [&rec](double r, const Vec3& x, double jac) {
        rec.times.push_back(r);
        rec.positions.push_back(x);
        rec.jacobian_log.push_back(jac);
      });
  return rec;
}

FlowPoint advect_endpoint(const FlowEvaluator& flow, double t, const Vec3& x0,
                          double s) {
  return run(flow, t, x0, s, /*want_jac=*/true, nullptr);
}

Vec3 flow_endpoint(const FlowEvaluator& flow, double t, const Vec3& x0,
                   double s) {
  return run(flow, t, x0, s, /*want_jac=*/false, nullptr).position;
}

std::vector<FlowPoint> advect_checkpoints(const FlowEvaluator& flow, double t,
                                          const Vec3& x0,
                                          const std::vector<double>& checkpoints) {
  for (std::size_t i = 0; i + 1 < checkpoints.size(); ++i) {
    const double d0 = checkpoints[i] - t;
    const double d1 = checkpoints[i + 1] - t;
    if (std::fabs(d1) < std::fabs(d0) ||
        (d0 != 0.0 && d1 != 0.0 && (d0 < 0.0) != (d1 < 0.0))) {
      throw std::invalid_argument("checkpoints must march away from t");
    }
  }
  std::vector<FlowPoint> out;
  out.reserve(checkpoints.size());
  Vec3 x = x0;
  double jac = 0.0;
  double cur = t;
  for (double target : checkpoints) {
    integrate_leg(flow, cur, target, x, jac, /*want_jac=*/true, nullptr);
    cur = target;
    out.push_back(FlowPoint{x, jac});
  }
  return out;
}

std::vector<Vec3> flow_map(const FlowEvaluator& flow, double s, double t,
                           const std::vector<Vec3>& points) {
  std::vector<Vec3> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      out[i] = run(flow, t, points[i], s, /*want_jac=*/false, nullptr).position;
    } catch (const TrajectoryEscape& e) {
      std::ostringstream msg;
      msg << "point index " << i << ": " << e.what();
      throw TrajectoryEscape(msg.str(), e.time(), e.where());
    }
  }
  return out;
}

namespace {

DefectStats stats_of(const std::vector<double>& defects) {
  DefectStats st;
  st.count = defects.size();
  if (defects.empty()) return st;
  st.max = *std::max_element(defects.begin(), defects.end());
  st.mean = pairwise_sum(defects) / static_cast<double>(defects.size());
  return st;
}

}  // namespace

DefectStats group_defect(const FlowEvaluator& flow, double s, double t,
                         const std::vector<Vec3>& points) {
  std::vector<double> defects(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 there = run(flow, t, points[i], s, false, nullptr).position;
    const Vec3 back = run(flow, s, there, t, false, nullptr).position;
    defects[i] = (back - points[i]).norm();
  }
  return stats_of(defects);
}

DefectStats semigroup_defect(const FlowEvaluator& flow, double s, double tau,
                             double t, const std::vector<Vec3>& points) {
  std::vector<double> defects(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 direct = run(flow, t, points[i], s, false, nullptr).position;
    const Vec3 mid = run(flow, t, points[i], tau, false, nullptr).position;
    const Vec3 composed = run(flow, tau, mid, s, false, nullptr).position;
    defects[i] = (direct - composed).norm();
  }
  return stats_of(defects);
}

IntegralEquationReport integral_equation_residual(const FlowEvaluator& flow,
                                                  double t, const Vec3& x0,
                                                  double s, int quad_nodes) {
  if (quad_nodes < 2) throw std::invalid_argument("need at least two nodes");
  const TrajectoryRecord rec = advect(flow, t, x0, s);
  const std::size_t total = rec.times.size();
  std::vector<std::size_t> pick;
  pick.reserve(quad_nodes);
  if (static_cast<std::size_t>(quad_nodes) >= total) {
    for (std::size_t i = 0; i < total; ++i) pick.push_back(i);
  } else {
    for (int j = 0; j < quad_nodes; ++j) {
      pick.push_back(static_cast<std::size_t>(
          std::llround(static_cast<double>(j) * (total - 1) / (quad_nodes - 1))));
    }
  }
  std::vector<Vec3> vals(pick.size());
  for (std::size_t j = 0; j < pick.size(); ++j) {
    vals[j] = flow.field.velocity(rec.times[pick[j]], rec.positions[pick[j]]);
  }
  Vec3 quad{};
  double hmax = 0.0;
  for (std::size_t j = 0; j + 1 < pick.size(); ++j) {
    const double dr = rec.times[pick[j + 1]] - rec.times[pick[j]];
    quad = quad + (0.5 * dr) * (vals[j] + vals[j + 1]);
    hmax = std::max(hmax, std::fabs(dr));
  }
  const Vec3 endpoint = rec.positions.back();
  IntegralEquationReport rep;
  rep.residual = (endpoint - x0 - quad).norm();
  // a posteriori trapezoid bound |I - Q| <= |s-t| h^2 M2 / 12 with M2 read off
  // the computed values by second differences, plus a roundoff floor
  double m2 = 0.0;
  for (std::size_t j = 1; j + 1 < pick.size(); ++j) {
    const double dr = std::max(std::fabs(rec.times[pick[j + 1]] - rec.times[pick[j]]),
                               std::fabs(rec.times[pick[j]] - rec.times[pick[j - 1]]));
    if (dr == 0.0) continue;
    const Vec3 dd = vals[j + 1] - 2.0 * vals[j] + vals[j - 1];
    m2 = std::max(m2, dd.norm() / (dr * dr));
  }
  rep.expected_bound = std::fabs(s - t) * hmax * hmax * m2 / 12.0 +
                       1e-12 * (1.0 + (endpoint - x0).norm());
  return rep;
}

MeasureEstimate leak_measure(const FlowEvaluator& flow, double s, double t,
                             const MeasurableSet& set, std::uint64_t n,
                             std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("need at least one sample");
  Rng rng(seed, Rng::stream_of("flow.leak"));
  const Domain& omega = flow.field.domain;
  std::vector<double> weights;
  weights.reserve(n);
  const bool direct = set.direct_sampler && set.exact_volume.has_value();
  const double scale = direct ? *set.exact_volume : omega.exact_volume;
  for (std::uint64_t i = 0; i < n; ++i) {
    Vec3 x;
    if (direct) {
      x = set.direct_sampler(rng, i);
    } else {
      x = sample_point(omega, rng, i);
      if (!set.indicator(x)) {
        weights.push_back(0.0);
        continue;
      }
    }
    const FlowPoint fp = advect_endpoint(flow, s, x, t);
    const bool outside = !contains(omega, fp.position);
    weights.push_back(outside ? std::exp(fp.jacobian_log) : 0.0);
  }
  const double mean = pairwise_sum(weights) / static_cast<double>(n);
  MeasureEstimate est;
  est.value = scale * mean;
  est.std_error = scale * std_error_of(weights);
  est.samples = n;
  est.seed = seed;
  return est;
}

void write_trajectory_csv(const TrajectoryRecord& record,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "r,x1,x2,x3,jac_log\n";
  for (std::size_t i = 0; i < record.times.size(); ++i) {
    out << csv_format(record.times[i]) << ',' << csv_format(record.positions[i].x)
        << ',' << csv_format(record.positions[i].y) << ','
        << csv_format(record.positions[i].z) << ','
        << csv_format(record.jacobian_log[i]) << '\n';
  }
}

}  // namespace flowlab
