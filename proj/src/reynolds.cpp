#include "flowlab/reynolds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "flowlab/csv.hpp"
#include "flowlab/fields.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/summation.hpp"

namespace flowlab {

namespace {

std::vector<double> uniform_grid(double a, double b, int m) {
  std::vector<double> g(static_cast<std::size_t>(m));
  const double h = (b - a) / static_cast<double>(m - 1);
  for (int k = 0; k < m; ++k) g[static_cast<std::size_t>(k)] = a + h * k;
  g.back() = b;
  return g;
}

std::vector<double> trapezoid_weights(double a, double b, int m) {
  const double h = (b - a) / static_cast<double>(m - 1);
  std::vector<double> w(static_cast<std::size_t>(m), h);
  w.front() = 0.5 * h;
  w.back() = 0.5 * h;
  return w;
}

// a-posteriori trapezoid error from second differences of the node means,
// |h|/12 * sum |f''| h, with a floor for the shared-sample cancellation cases.
// The end intervals carry no centered difference, so they are padded with the
// nearest one, and a half-again margin keeps the estimate on the safe side.
double trapezoid_tolerance(const std::vector<double>& node_means, double h) {
  double acc = 0.0;
  double first = 0.0;
  double last = 0.0;
  for (std::size_t k = 1; k + 1 < node_means.size(); ++k) {
    const double d2 =
        std::abs(node_means[k - 1] - 2.0 * node_means[k] + node_means[k + 1]);
    if (k == 1) first = d2;
    last = d2;
    acc += d2;
  }
  return 1.5 * std::abs(h) / 12.0 * (acc + 0.5 * (first + last)) + 1e-12;
}

void require_density(const DensityFunction& g, const char* who) {
  if (!g.g || !g.dg_dt || !g.grad_g) {
    throw std::invalid_argument(std::string(who) +
                                ": density needs g, dg_dt and grad_g");
  }
}

void check_density_gate(const DensityFunction& g, const FlowEvaluator& flow,
                        double s, double t, std::uint64_t seed,
                        const char* who) {
  const double defect =
      density_derivative_defect(g, flow.enclosure.as_ball_domain(),
                                std::min(s, t), std::max(s, t), 100, seed);
  if (defect > 1e-4) {
    throw std::invalid_argument(
        std::string(who) +
        ": supplied density derivatives disagree with central differences "
        "(defect " +
        std::to_string(defect) + ")");
  }
}

ReynoldsReport assemble_report(const char* tag, double s, double t, double lhs,
                               double lhs_sigma, double base,
                               double base_sigma, double time_term,
                               double time_sigma, double quad_tol, int m,
                               std::uint64_t seed) {
  ReynoldsReport rep;
  rep.identity_tag = tag;
  rep.s = s;
  rep.t = t;
  rep.lhs = lhs;
  rep.rhs = base + time_term;
  rep.residual = std::abs(rep.lhs - rep.rhs);
  rep.mc_sigma = std::sqrt(lhs_sigma * lhs_sigma + base_sigma * base_sigma +
                           time_sigma * time_sigma);
  rep.quad_tol = quad_tol;
  rep.time_quadrature_nodes = m;
  rep.seed = seed;
  return rep;
}

// Endpoint term vs base term plus time integral, with the moving set pushed
// forward from A: one trajectory per A-sample carrying positions and
// jacobian logs at every quadrature node.
ReynoldsReport image_side_residual(const FlowEvaluator& flow,
                                   const DensityFunction& g, double s,
                                   double t, const MeasurableSet& set, int m,
                                   std::uint64_t n, std::uint64_t seed,
                                   const char* tag) {
  if (m < 3) {
    throw std::invalid_argument("reynolds: time_nodes must be >= 3");
  }
  if (n < 2) throw std::invalid_argument("reynolds: need n >= 2 samples");
  require_density(g, "reynolds");
  if (!set.indicator) throw std::invalid_argument("reynolds: set needs an indicator");

  const auto grid = uniform_grid(t, s, m);
  const auto weights = trapezoid_weights(t, s, m);
  const bool direct =
      static_cast<bool>(set.direct_sampler) && set.exact_volume.has_value();
  const double scale =
      direct ? *set.exact_volume : flow.field.domain.exact_volume;

  const Rng rng(seed, Rng::stream_of("reynolds.image.rtt"));
  std::vector<double> end_vals(n, 0.0);
  std::vector<double> base_vals(n, 0.0);
  std::vector<double> time_vals(n, 0.0);
  std::vector<double> node_sums(static_cast<std::size_t>(m), 0.0);
  std::vector<double> contrib(static_cast<std::size_t>(m));

  for (std::uint64_t j = 0; j < n; ++j) {
    const Vec3 x = direct ? set.direct_sampler(rng, j)
                          : sample_point(flow.field.domain, rng, j);
    if (!direct && !set.indicator(x)) continue;

    const auto pts = advect_checkpoints(flow, t, x, grid);
    base_vals[j] = g.g(t, x);
    end_vals[j] =
        g.g(s, pts.back().position) * std::exp(pts.back().jacobian_log);
    for (int k = 0; k < m; ++k) {
      const std::size_t ku = static_cast<std::size_t>(k);
      const double r = grid[ku];
      const Vec3& y = pts[ku].position;
      const double val = (g.dg_dt(r, y) +
                          g.g(r, y) * flow.field.divergence(r, y) +
                          dot(flow.field.velocity(r, y), g.grad_g(r, y))) *
                         std::exp(pts[ku].jacobian_log);
      contrib[ku] = weights[ku] * val;
      node_sums[ku] += val;
    }
    time_vals[j] = pairwise_sum(contrib);
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> node_means(node_sums.size());
  for (std::size_t k = 0; k < node_sums.size(); ++k) {
    node_means[k] = scale * node_sums[k] * inv_n;
  }
  const double h = (s - t) / static_cast<double>(m - 1);
  return assemble_report(tag, s, t, scale * mean_of(end_vals),
                         scale * std_error_of(end_vals),
                         scale * mean_of(base_vals),
                         scale * std_error_of(base_vals),
                         scale * mean_of(time_vals),
                         scale * std_error_of(time_vals),
                         trapezoid_tolerance(node_means, h), m, seed);
}

// Same decomposition with the moving set pulled back: membership of advected
// Omega samples, integrand evaluated at the unmoved sample point.
ReynoldsReport preimage_side_residual(const FlowEvaluator& flow,
                                      const DensityFunction& g, double s,
                                      double t, const MeasurableSet& set,
                                      int m, std::uint64_t n,
                                      std::uint64_t seed, const char* tag) {
  if (m < 3) {
    throw std::invalid_argument("reynolds: time_nodes must be >= 3");
  }
  if (n < 2) throw std::invalid_argument("reynolds: need n >= 2 samples");
  require_density(g, "reynolds");
  if (!set.indicator) throw std::invalid_argument("reynolds: set needs an indicator");

  // nodes run from s to t; the set at node r is the preimage of A under the
  // flow from r to s, so node 0 is A itself and the last node carries the lhs
  const auto grid = uniform_grid(s, t, m);
  const auto weights = trapezoid_weights(s, t, m);
  const Domain& omega = flow.field.domain;
  const double scale = omega.exact_volume;

  std::vector<double> marks(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) marks[k] = grid[0] - grid[k];

  const Rng rng(seed, Rng::stream_of("reynolds.preimage.rtt"));
  std::vector<double> end_vals(n, 0.0);
  std::vector<double> base_vals(n, 0.0);
  std::vector<double> time_vals(n, 0.0);
  std::vector<double> node_sums(static_cast<std::size_t>(m), 0.0);
  std::vector<double> contrib(static_cast<std::size_t>(m));
  std::vector<Vec3> positions(grid.size());

  for (std::uint64_t j = 0; j < n; ++j) {
    const Vec3 x = sample_point(omega, rng, j);
    if (flow.field.autonomous) {
      const auto pts = advect_checkpoints(flow, 0.0, x, marks);
      for (std::size_t k = 0; k < pts.size(); ++k) positions[k] = pts[k].position;
    } else {
      for (std::size_t k = 0; k < grid.size(); ++k) {
        positions[k] = flow_endpoint(flow, grid[k], x, s);
      }
    }

    for (int k = 0; k < m; ++k) {
      const std::size_t ku = static_cast<std::size_t>(k);
      if (!set.indicator(positions[ku])) {
        contrib[ku] = 0.0;
        continue;
      }
      const double r = grid[ku];
      const double val = g.dg_dt(r, x) +
                         g.g(r, x) * flow.field.divergence(r, x) +
                         dot(flow.field.velocity(r, x), g.grad_g(r, x));
      contrib[ku] = weights[ku] * val;
      node_sums[ku] += val;
    }
    if (set.indicator(positions.front())) base_vals[j] = g.g(s, x);
    if (set.indicator(positions.back())) end_vals[j] = g.g(t, x);
    time_vals[j] = pairwise_sum(contrib);
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> node_means(node_sums.size());
  for (std::size_t k = 0; k < node_sums.size(); ++k) {
    node_means[k] = scale * node_sums[k] * inv_n;
  }
  const double h = (t - s) / static_cast<double>(m - 1);
  return assemble_report(tag, s, t, scale * mean_of(end_vals),
                         scale * std_error_of(end_vals),
                         scale * mean_of(base_vals),
                         scale * std_error_of(base_vals),
                         scale * mean_of(time_vals),
                         scale * std_error_of(time_vals),
                         trapezoid_tolerance(node_means, h), m, seed);
}

}  // namespace

DensityFunction constant_density(double value) {
  DensityFunction g;
  g.g = [value](double, const Vec3&) { return value; };
  g.dg_dt = [](double, const Vec3&) { return 0.0; };
  g.grad_g = [](double, const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
  return g;
}

double density_derivative_defect(const DensityFunction& g,
                                 const Domain& region, double t_lo,
                                 double t_hi, int probes, std::uint64_t seed) {
  require_density(g, "density_derivative_defect");
  if (probes < 1) {
    throw std::invalid_argument("density_derivative_defect: probes must be >= 1");
  }
  const Rng rng(seed, Rng::stream_of("reynolds.gcheck"));
  const double span = std::max(t_hi - t_lo, 1.0);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    // points take the even sample slots, the time draw lives in the odd ones
    const std::uint64_t j = static_cast<std::uint64_t>(p);
    const Vec3 x = sample_point(region, rng, 2 * j);
    const double tau = t_lo + (t_hi - t_lo) * rng.uniform(6 * j + 3);
    const double ht = 1e-5 * span;
    const double dt_fd = (g.g(tau + ht, x) - g.g(tau - ht, x)) / (2.0 * ht);
    const double dt_given = g.dg_dt(tau, x);
    worst = std::max(worst, std::abs(dt_fd - dt_given) /
                                (1.0 + std::abs(dt_given)));
    const double hx = 1e-5 * std::max(region.circumscribed_radius(), 1.0);
    const Vec3 grad_given = g.grad_g(tau, x);
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 xp = x;
      Vec3 xm = x;
      xp[axis] += hx;
      xm[axis] -= hx;
      const double d_fd = (g.g(tau, xp) - g.g(tau, xm)) / (2.0 * hx);
      worst = std::max(worst, std::abs(d_fd - grad_given[axis]) /
                                  (1.0 + std::abs(grad_given[axis])));
    }
  }
  return worst;
}

MeasureEstimate measure_preimage(const FlowEvaluator& flow, double s, double t,
                                 const MeasurableSet& set, std::uint64_t n,
                                 std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("measure_preimage: n must be >= 1");
  if (!set.indicator) {
    throw std::invalid_argument("measure_preimage: set needs an indicator");
  }
  const Domain& omega = flow.field.domain;
  const Rng rng(seed, Rng::stream_of("reynolds.preimage"));
  std::vector<double> vals(n);
  for (std::uint64_t j = 0; j < n; ++j) {
    const Vec3 x = sample_point(omega, rng, j);
    const Vec3 y = flow_endpoint(flow, t, x, s);
    vals[j] = set.indicator(y) ? 1.0 : 0.0;
  }
  MeasureEstimate est;
  est.value = omega.exact_volume * mean_of(vals);
  est.std_error = omega.exact_volume * std_error_of(vals);
  est.samples = n;
  est.seed = seed;
  return est;
}

MeasureEstimate measure_image(const FlowEvaluator& flow, double s, double t,
                              const MeasurableSet& set, std::uint64_t n,
                              std::uint64_t seed) {
  // forward image through the round trip: x lands in X(s,t,A) exactly when
  // the reverse flow takes it into A
  return measure_preimage(flow, t, s, set, n, seed);
}

MeasureEstimate measure_image_jacobian(const FlowEvaluator& flow, double s,
                                       double t, const MeasurableSet& set,
                                       std::uint64_t n, std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("measure_image_jacobian: n must be >= 1");
  }
  if (!set.indicator) {
    throw std::invalid_argument("measure_image_jacobian: set needs an indicator");
  }
  const bool direct =
      static_cast<bool>(set.direct_sampler) && set.exact_volume.has_value();
  const double scale =
      direct ? *set.exact_volume : flow.field.domain.exact_volume;
  const Rng rng(seed, Rng::stream_of("reynolds.jacobian"));
  std::vector<double> vals(n, 0.0);
  for (std::uint64_t j = 0; j < n; ++j) {
    const Vec3 x = direct ? set.direct_sampler(rng, j)
                          : sample_point(flow.field.domain, rng, j);
    if (!direct && !set.indicator(x)) continue;
    vals[j] = std::exp(advect_endpoint(flow, t, x, s).jacobian_log);
  }
  MeasureEstimate est;
  est.value = scale * mean_of(vals);
  est.std_error = scale * std_error_of(vals);
  est.samples = n;
  est.seed = seed;
  return est;
}

ReynoldsReport rtt_measure_residual(const FlowEvaluator& flow, double s,
                                    double t, const MeasurableSet& set,
                                    int time_nodes, std::uint64_t n,
                                    std::uint64_t seed,
                                    MeasureVariant variant) {
  const DensityFunction one = constant_density(1.0);
  if (variant == MeasureVariant::trans1) {
    return image_side_residual(flow, one, s, t, set, time_nodes, n, seed,
                               "trans1");
  }
  return preimage_side_residual(flow, one, s, t, set, time_nodes, n, seed,
                                "trans0");
}

ReynoldsReport rtt_density_residual(const FlowEvaluator& flow,
                                    const DensityFunction& g, double s,
                                    double t, const MeasurableSet& set,
                                    int time_nodes, std::uint64_t n,
                                    std::uint64_t seed,
                                    DensityVariant variant) {
  require_density(g, "rtt_density_residual");
  check_density_gate(g, flow, s, t, seed, "rtt_density_residual");
  if (variant == DensityVariant::trans2) {
    return image_side_residual(flow, g, s, t, set, time_nodes, n, seed,
                               "trans2");
  }
  return preimage_side_residual(flow, g, s, t, set, time_nodes, n, seed,
                                "trans3");
}

ReynoldsReport classical_density_residual(const FlowEvaluator& flow,
                                          const DensityFunction& g, double s,
                                          double t, const MeasurableSet& set,
                                          int time_nodes, std::uint64_t n,
                                          std::uint64_t seed) {
  require_density(g, "classical_density_residual");
  check_density_gate(g, flow, s, t, seed, "classical_density_residual");
  return image_side_residual(flow, g, s, t, set, time_nodes, n, seed, "usi1");
}

ReynoldsReport classical_measure_residual(const FlowEvaluator& flow, double s,
                                          double t, const MeasurableSet& set,
                                          int time_nodes, std::uint64_t n,
                                          std::uint64_t seed) {
  return image_side_residual(flow, constant_density(1.0), s, t, set,
                             time_nodes, n, seed, "usi2");
}

ReynoldsReport change_of_variables_check(
    const FlowEvaluator& flow, const std::function<double(const Vec3&)>& f,
    double s, double t, int time_nodes, std::uint64_t n, std::uint64_t seed) {
  if (time_nodes < 3) {
    throw std::invalid_argument(
        "change_of_variables_check: time_nodes must be >= 3");
  }
  if (n < 2) {
    throw std::invalid_argument("change_of_variables_check: need n >= 2");
  }
  if (!f) throw std::invalid_argument("change_of_variables_check: f missing");

  const int m = time_nodes;
  const auto grid = uniform_grid(s, t, m);
  const auto weights = trapezoid_weights(s, t, m);
  const Domain box = flow.enclosure.as_ball_domain();
  const double scale = box.exact_volume;

  std::vector<double> marks(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) marks[k] = grid[0] - grid[k];

  const Rng rng(seed, Rng::stream_of("reynolds.cov"));
  std::vector<double> end_vals(n, 0.0);
  std::vector<double> base_vals(n, 0.0);
  std::vector<double> time_vals(n, 0.0);
  std::vector<double> node_sums(static_cast<std::size_t>(m), 0.0);
  std::vector<double> contrib(static_cast<std::size_t>(m));
  std::vector<Vec3> positions(grid.size());

  for (std::uint64_t j = 0; j < n; ++j) {
    const Vec3 x = sample_point(box, rng, j);
    if (flow.field.autonomous) {
      const auto pts = advect_checkpoints(flow, 0.0, x, marks);
      for (std::size_t k = 0; k < pts.size(); ++k) positions[k] = pts[k].position;
    } else {
      for (std::size_t k = 0; k < grid.size(); ++k) {
        positions[k] = flow_endpoint(flow, grid[k], x, s);
      }
    }
    base_vals[j] = f(positions.front());
    end_vals[j] = f(positions.back());
    for (int k = 0; k < m; ++k) {
      const std::size_t ku = static_cast<std::size_t>(k);
      const double div = flow.field.divergence(grid[ku], x);
      const double val = div == 0.0 ? 0.0 : f(positions[ku]) * div;
      contrib[ku] = weights[ku] * val;
      node_sums[ku] += val;
    }
    time_vals[j] = pairwise_sum(contrib);
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> node_means(node_sums.size());
  for (std::size_t k = 0; k < node_sums.size(); ++k) {
    node_means[k] = scale * node_sums[k] * inv_n;
  }
  const double h = (t - s) / static_cast<double>(m - 1);
  return assemble_report("cov", s, t, scale * mean_of(end_vals),
                         scale * std_error_of(end_vals),
                         scale * mean_of(base_vals),
                         scale * std_error_of(base_vals),
                         scale * mean_of(time_vals),
                         scale * std_error_of(time_vals),
                         trapezoid_tolerance(node_means, h), m, seed);
}

std::vector<LimitStudyRow> rtt_limit_study(
    const VelocityField& base_field, const std::vector<double>& eps_list,
    double s, double t, const MeasurableSet& set, const Enclosure& enclosure,
    double step_size, std::uint64_t n, std::uint64_t seed, int order) {
  if (eps_list.empty()) {
    throw std::invalid_argument("rtt_limit_study: eps_list is empty");
  }
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (eps_list[i] <= 0.0 ||
        (i > 0 && eps_list[i] >= eps_list[i - 1])) {
      throw std::invalid_argument(
          "rtt_limit_study: eps_list must be positive and strictly decreasing");
    }
  }
  std::vector<LimitStudyRow> rows;
  rows.reserve(eps_list.size());
  for (const double eps : eps_list) {
    const VelocityField smoothed =
        mollify(base_field, enclosure, eps, order).as_field();
    const FlowEvaluator flow = make_flow(smoothed, enclosure, step_size);
    LimitStudyRow row;
    row.eps = eps;
    row.preimage = measure_preimage(flow, s, t, set, n, seed);
    row.image = measure_image(flow, s, t, set, n, seed);
    row.image_jacobian = measure_image_jacobian(flow, s, t, set, n, seed);
    if (!rows.empty()) {
      const LimitStudyRow& prev = rows.back();
      row.preimage_difference =
          std::abs(row.preimage.value - prev.preimage.value);
      row.image_difference = std::abs(row.image.value - prev.image.value);
      row.jacobian_difference =
          std::abs(row.image_jacobian.value - prev.image_jacobian.value);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ContainmentReport containment_check(const FlowEvaluator& flow, double s,
                                    double t, const MeasurableSet& set,
                                    std::uint64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("containment_check: n must be >= 1");
  if (!set.indicator || !set.contains_dilated) {
    throw std::invalid_argument(
        "containment_check: set needs indicator and contains_dilated");
  }
  const Domain& omega = flow.field.domain;
  const Rng rng(seed, Rng::stream_of("reynolds.containment"));
  ContainmentReport rep;
  std::vector<Vec3> starts;
  std::vector<Vec3> round_trips;
  for (std::uint64_t j = 0; j < n; ++j) {
    const Vec3 x = sample_point(omega, rng, j);
    if (!set.indicator(x)) continue;
    const Vec3 y = flow_endpoint(flow, t, x, s);
    const Vec3 z = flow_endpoint(flow, s, y, t);
    starts.push_back(x);
    round_trips.push_back(z);
    rep.worst_defect = std::max(rep.worst_defect, norm(z - x));
  }
  rep.checked = starts.size();
  rep.delta = 10.0 * rep.worst_defect;
  for (const Vec3& z : round_trips) {
    if (!set.contains_dilated(z, rep.delta)) ++rep.violations;
  }
  return rep;
}

SandwichReport compressibility_sandwich(const FlowEvaluator& flow, double s,
                                        double t, const MeasurableSet& set,
                                        std::uint64_t n, std::uint64_t seed) {
  SandwichReport rep;
  const MeasureEstimate est = measure_preimage(flow, s, t, set, n, seed);
  rep.estimate = est.value;
  rep.sigma = est.std_error;
  double meas_sigma = 0.0;
  if (set.exact_volume.has_value()) {
    rep.set_measure = *set.exact_volume;
  } else {
    const MeasureEstimate direct =
        estimate_measure(set, flow.field.domain, n, seed);
    rep.set_measure = direct.value;
    meas_sigma = direct.std_error;
  }
  rep.c = compressibility_constant(flow.field, s, t);
  const double slack = 4.0 * (rep.sigma + std::max(rep.c, 1.0 / rep.c) * meas_sigma);
  rep.lower = rep.set_measure / rep.c - slack;
  rep.upper = rep.c * rep.set_measure + slack;
  rep.inside = rep.estimate >= rep.lower && rep.estimate <= rep.upper;
  return rep;
}

void write_reynolds_csv(const std::vector<ReynoldsReport>& reports,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_reynolds_csv: cannot open " + path);
  }
  out << "identity_tag,s,t,lhs,rhs,residual,mc_sigma,nodes,seed\n";
  for (const auto& r : reports) {
    out << r.identity_tag << ',' << csv_format(r.s) << ',' << csv_format(r.t)
        << ',' << csv_format(r.lhs) << ',' << csv_format(r.rhs) << ','
        << csv_format(r.residual) << ',' << csv_format(r.mc_sigma) << ','
        << csv_format(static_cast<long long>(r.time_quadrature_nodes)) << ','
        << csv_format(static_cast<unsigned long long>(r.seed)) << '\n';
  }
}

std::string format_reynolds_table(const std::vector<ReynoldsReport>& reports) {
  std::string out =
      "tag      s         t         lhs            rhs            residual   "
      "mc_sigma   quad_tol   nodes\n";
  char line[192];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof(line),
                  "%-8s %-9.4g %-9.4g %-14.8g %-14.8g %-10.3g %-10.3g %-10.3g "
                  "%d\n",
                  r.identity_tag.c_str(), r.s, r.t, r.lhs, r.rhs, r.residual,
                  r.mc_sigma, r.quad_tol, r.time_quadrature_nodes);
    out += line;
  }
  return out;
}

}  // namespace flowlab
