#include "flowlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <map>
#include <stdexcept>

#include "flowlab/quadrature.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/summation.hpp"

namespace flowlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double bump_profile(double q) {
  // exp(1/(q-1) + 1): equals 1 at q = 0, vanishes with all derivatives at q = 1
  if (q >= 1.0) return 0.0;
  return std::exp(1.0 / (q - 1.0) + 1.0);
}

double bump_profile_deriv(double q) {
  if (q >= 1.0) return 0.0;
  const double d = q - 1.0;
  return -bump_profile(q) / (d * d);
}

}  // namespace

InitialDatum coordinate_datum(int axis, double sup_bound) {
  if (axis < 0 || axis > 2) throw std::invalid_argument("axis must be 0, 1 or 2");
  if (sup_bound <= 0.0) throw std::invalid_argument("sup bound must be positive");
  InitialDatum d;
  d.kind = InitialDatum::Kind::Coordinate;
  d.label = std::string("x") + static_cast<char>('1' + axis);
  d.evaluate = [axis](const Vec3& x) { return x[axis]; };
  d.sup_bound = sup_bound;
  return d;
}

InitialDatum smooth_bump_datum(const Vec3& center, double radius,
                               double amplitude) {
  if (radius <= 0.0) throw std::invalid_argument("bump radius must be positive");
  InitialDatum d;
  d.kind = InitialDatum::Kind::SmoothBump;
  d.label = "bump";
  d.evaluate = [center, radius, amplitude](const Vec3& x) {
    const double q = (x - center).norm2() / (radius * radius);
    return amplitude * bump_profile(q);
  };
  d.sup_bound = std::fabs(amplitude);
  return d;
}

InitialDatum mollified_indicator_datum(const Vec3& center, double radius,
                                       double delta) {
  if (radius <= 0.0 || delta <= 0.0) {
    throw std::invalid_argument("indicator radius and delta must be positive");
  }
  // radial closed form of (eta_delta * 1_{B_radius}): average over kernel
  // shells of the surface fraction inside the ball
  const QuadRule rule = scaled_rule(gauss_legendre(20), 0.0, delta);
  struct Shell {
    double u;
    double w;  // normalized radial kernel weight
  };
  auto shells = std::make_shared<std::vector<Shell>>();
  double mass = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = rule.nodes[i];
    const double q = (u / delta) * (u / delta);
    const double k = u * u * std::exp(1.0 / (q - 1.0));
    shells->push_back({u, rule.weights[i] * k});
    mass += rule.weights[i] * k;
  }
  for (auto& sh : *shells) sh.w /= mass;  // discrete unit mass
  InitialDatum d;
  d.kind = InitialDatum::Kind::IndicatorMollified;
  d.label = "mollified indicator";
  d.evaluate = [center, radius, shells](const Vec3& x) {
    const double rho = (x - center).norm();
    double acc = 0.0;
    for (const auto& sh : *shells) {
      double frac;
      if (rho + sh.u <= radius) {
        frac = 1.0;
      } else if (std::fabs(rho - sh.u) >= radius) {
        frac = 0.0;
      } else {
        const double c = (rho * rho + sh.u * sh.u - radius * radius) /
                         (2.0 * rho * sh.u);
        frac = 0.5 * (1.0 - c);
      }
      acc += sh.w * frac;
    }
    return acc;
  };
  d.sup_bound = 1.0;
  return d;
}

TransportSolution lagrangian_solution(FlowEvaluator flow, InitialDatum rho0,
                                      double s) {
  TransportSolution sol;
  sol.s = s;
  sol.field_tag = flow.field.name;
  sol.provenance = "lagrangian";
  auto fl = std::make_shared<FlowEvaluator>(std::move(flow));
  auto datum = std::make_shared<InitialDatum>(std::move(rho0));
  sol.evaluate = [fl, datum, s](double t, const Vec3& x) {
    return datum->evaluate(flow_endpoint(*fl, t, x, s));
  };
  return sol;
}

std::vector<double> solve_lagrangian(const FlowEvaluator& flow,
                                     const InitialDatum& rho0, double s,
                                     double t, const std::vector<Vec3>& points) {
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = rho0.evaluate(flow_endpoint(flow, t, points[i], s));
  }
  return out;
}

double GridFunction::cell_width(int axis) const {
  return 2.0 * box.halfwidths[axis] / cells;
}

double GridFunction::cell_volume() const {
  return cell_width(0) * cell_width(1) * cell_width(2);
}

Vec3 GridFunction::cell_center(int i, int j, int k) const {
  return Vec3{box.center.x - box.halfwidths.x + (i + 0.5) * cell_width(0),
              box.center.y - box.halfwidths.y + (j + 0.5) * cell_width(1),
              box.center.z - box.halfwidths.z + (k + 0.5) * cell_width(2)};
}

double& GridFunction::at(int i, int j, int k) {
  return values[(static_cast<std::size_t>(i) * cells + j) * cells + k];
}

double GridFunction::at(int i, int j, int k) const {
  return values[(static_cast<std::size_t>(i) * cells + j) * cells + k];
}

double GridFunction::l1_norm() const {
  double acc = 0.0;
  for (double v : values) acc += std::fabs(v);
  return cell_volume() * acc;
}

double GridFunction::l2_norm() const {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(cell_volume() * acc);
}

namespace {

void validate_grid_spec(const GridSpec& spec) {
  if (spec.box.kind != Domain::Kind::Box) {
    throw std::invalid_argument("grid region must be a box");
  }
  if (spec.cells < 2) throw std::invalid_argument("grid needs at least 2 cells");
}

void require_covering(const GridSpec& spec, const Domain& omega) {
  for (int a = 0; a < 3; ++a) {
    const double off = std::fabs(omega.center[a] - spec.box.center[a]);
    const double reach = omega.kind == Domain::Kind::Ball ? omega.radius
                                                          : omega.halfwidths[a];
    if (off + reach > spec.box.halfwidths[a] + 1e-12) {
      throw std::invalid_argument("grid box does not cover the domain");
    }
  }
}

}  // namespace

GridFunction sample_on_grid(const std::function<double(const Vec3&)>& f,
                            const GridSpec& spec) {
  validate_grid_spec(spec);
  GridFunction g;
  g.box = spec.box;
  g.cells = spec.cells;
  g.values.assign(static_cast<std::size_t>(spec.cells) * spec.cells * spec.cells,
                  0.0);
  for (int i = 0; i < g.cells; ++i) {
    for (int j = 0; j < g.cells; ++j) {
      for (int k = 0; k < g.cells; ++k) {
        g.at(i, j, k) = f(g.cell_center(i, j, k));
      }
    }
  }
  return g;
}

GridFunction solve_eulerian(const VelocityField& field, const InitialDatum& rho0,
                            double s, double t, const GridSpec& spec) {
  validate_grid_spec(spec);
  require_covering(spec, field.domain);
  GridFunction g = sample_on_grid(rho0.evaluate, spec);
  if (t == s) return g;

  const double hmin = std::min({g.cell_width(0), g.cell_width(1), g.cell_width(2)});
  const double span = std::fabs(t - s);
  const double cfl_dt = field.sup_speed_bound > 0.0
                            ? 0.4 * hmin / field.sup_speed_bound
                            : span;
  const double dt_req = spec.dt.value_or(cfl_dt);
  if (dt_req <= 0.0) throw std::invalid_argument("substep must be positive");
  if (dt_req > cfl_dt * (1.0 + 1e-12)) {
    throw std::invalid_argument("substep violates the CFL bound 0.4 h / sup|v|");
  }
  const auto nsub = static_cast<std::int64_t>(std::ceil(span / dt_req));
  const double dtau = (t - s) / static_cast<double>(nsub);

  const int n = g.cells;
  const std::size_t total = g.values.size();
  std::vector<Vec3> vel(total);
  auto fill_velocity = [&](double when) {
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k, ++idx) {
          vel[idx] = field.velocity(when, g.cell_center(i, j, k));
        }
      }
    }
  };
  if (field.autonomous) fill_velocity(s);

  const std::size_t stride[3] = {static_cast<std::size_t>(n) * n,
                                 static_cast<std::size_t>(n), 1};
  std::vector<double> buf(total);
  for (std::int64_t step = 0; step < nsub; ++step) {
    if (!field.autonomous) fill_velocity(s + dtau * static_cast<double>(step));
    for (int axis = 0; axis < 3; ++axis) {
      buf.swap(g.values);
      const double inv_h = 1.0 / g.cell_width(axis);
      std::size_t idx = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          for (int k = 0; k < n; ++k, ++idx) {
            const double u = vel[idx][axis];
            if (u == 0.0) {
              g.values[idx] = buf[idx];
              continue;
            }
            const double c = dtau * u * inv_h;
            const int pos = axis == 0 ? i : (axis == 1 ? j : k);
            double diff;
            if (c > 0.0) {
              diff = pos > 0 ? buf[idx] - buf[idx - stride[axis]] : 0.0;
            } else {
              diff = pos + 1 < n ? buf[idx + stride[axis]] - buf[idx] : 0.0;
            }
            g.values[idx] = buf[idx] - c * diff;
          }
        }
      }
    }
  }
  return g;
}

TransportSolution eulerian_solution(VelocityField field, InitialDatum rho0,
                                    double s, GridSpec spec) {
  validate_grid_spec(spec);
  require_covering(spec, field.domain);
  TransportSolution sol;
  sol.s = s;
  sol.field_tag = field.name;
  sol.provenance = "eulerian";

  struct State {
    VelocityField field;
    InitialDatum rho0;
    double s;
    GridSpec spec;
    std::map<double, GridFunction> cache;
    std::mutex mu;
  };
  auto st = std::make_shared<State>();
  st->field = std::move(field);
  st->rho0 = std::move(rho0);
  st->s = s;
  st->spec = std::move(spec);

  sol.evaluate = [st](double t, const Vec3& x) {
    if (t == st->s) return st->rho0.evaluate(x);
    const GridFunction* grid = nullptr;
    {
      std::lock_guard<std::mutex> lock(st->mu);
      auto it = st->cache.find(t);
      if (it == st->cache.end()) {
        it = st->cache
                 .emplace(t, solve_eulerian(st->field, st->rho0, st->s, t,
                                            st->spec))
                 .first;
      }
      grid = &it->second;
    }
    // clamped trilinear interpolation
    const int n = grid->cells;
    double w[3][2];
    int base[3];
    for (int a = 0; a < 3; ++a) {
      const double lo = grid->box.center[a] - grid->box.halfwidths[a];
      double u = (x[a] - lo) / grid->cell_width(a) - 0.5;
      u = std::clamp(u, 0.0, static_cast<double>(n - 1));
      base[a] = std::min(static_cast<int>(u), n - 2);
      const double f = u - base[a];
      w[a][0] = 1.0 - f;
      w[a][1] = f;
    }
    double acc = 0.0;
    for (int di = 0; di < 2; ++di) {
      for (int dj = 0; dj < 2; ++dj) {
        for (int dk = 0; dk < 2; ++dk) {
          acc += w[0][di] * w[1][dj] * w[2][dk] *
                 grid->at(base[0] + di, base[1] + dj, base[2] + dk);
        }
      }
    }
    return acc;
  };
  return sol;
}

std::vector<NormEvolutionReport> l2_identity_residual(
    const FlowEvaluator& flow, const InitialDatum& rho0, double s,
    const std::vector<double>& times, std::uint64_t n, std::uint64_t seed,
    int nodes_per_unit_time) {
  if (times.empty()) return {};
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (times[i + 1] < times[i]) {
      throw std::invalid_argument("times must be sorted ascending");
    }
  }
  if (times.front() < s) {
    throw std::invalid_argument("times must not precede the initial time");
  }
  if (n < 100) throw std::invalid_argument("need at least 100 samples");

  // one global node grid containing s and every requested time
  std::vector<double> nodes{s};
  std::vector<std::size_t> report_at;
  for (double t : times) {
    const double prev = nodes.back();
    if (t == prev) {
      report_at.push_back(nodes.size() - 1);
      continue;
    }
    const int segs = std::max(
        1, static_cast<int>(std::ceil((t - prev) * nodes_per_unit_time)));
    for (int j = 1; j <= segs; ++j) {
      nodes.push_back(prev + (t - prev) * j / segs);
    }
    nodes.back() = t;
    report_at.push_back(nodes.size() - 1);
  }
  const std::size_t m = nodes.size();

  const Domain& omega = flow.field.domain;
  Rng rng(seed, Rng::stream_of("transport.l2"));
  const double vol = omega.exact_volume;

  // per time: per-sample lhs values and per-sample residuals
  std::vector<std::vector<double>> lhs_vals(times.size()),
      res_vals(times.size());
  for (auto& v : lhs_vals) v.resize(n);
  for (auto& v : res_vals) v.resize(n);
  std::vector<double> rho2(m), divs(m), trap(m);

  std::vector<double> marks(m);
  for (std::uint64_t j = 0; j < n; ++j) {
    const Vec3 xj = sample_point(omega, rng, j);
    if (flow.field.autonomous) {
      for (std::size_t k = 0; k < m; ++k) marks[k] = s - nodes[k];
      const auto pts = advect_checkpoints(flow, 0.0, xj, marks);
      for (std::size_t k = 0; k < m; ++k) {
        const double r = rho0.evaluate(pts[k].position);
        rho2[k] = r * r;
        divs[k] = flow.field.divergence(nodes[k], xj);
      }
    } else {
      for (std::size_t k = 0; k < m; ++k) {
        const Vec3 y = flow_endpoint(flow, nodes[k], xj, s);
        const double r = rho0.evaluate(y);
        rho2[k] = r * r;
        divs[k] = flow.field.divergence(nodes[k], xj);
      }
    }
    trap[0] = 0.0;
    for (std::size_t k = 1; k < m; ++k) {
      trap[k] = trap[k - 1] + 0.5 * (nodes[k] - nodes[k - 1]) *
                                  (divs[k - 1] * rho2[k - 1] + divs[k] * rho2[k]);
    }
    for (std::size_t q = 0; q < times.size(); ++q) {
      const std::size_t k = report_at[q];
      lhs_vals[q][j] = rho2[k];
      res_vals[q][j] = rho2[k] - rho2[0] - trap[k];
    }
  }

  std::vector<NormEvolutionReport> out(times.size());
  for (std::size_t q = 0; q < times.size(); ++q) {
    NormEvolutionReport rep;
    rep.t = times[q];
    rep.lhs = vol * mean_of(lhs_vals[q]);
    const double res_mean = vol * mean_of(res_vals[q]);
    rep.rhs = rep.lhs - res_mean;
    rep.residual = std::fabs(res_mean);
    rep.mc_sigma = vol * std_error_of(res_vals[q]);
    out[q] = rep;
  }
  return out;
}

GridFunction commutator_field(const VelocityField& field,
                              const std::function<double(const Vec3&)>& rho,
                              double eps, double t, const GridSpec& spec,
                              const Enclosure& enclosure, int order) {
  validate_grid_spec(spec);
  if (eps <= 0.0 || eps > enclosure.eps_max) {
    throw std::invalid_argument("eps must lie within the enclosure margin");
  }
  if (order < 8) throw std::invalid_argument("convolution order must be >= 8");

  const Mollifier moll = make_mollifier(eps);
  const QuadRule rule = scaled_rule(gauss_legendre(order), -eps, eps);
  const int q = order;
  std::vector<double> w_eta(static_cast<std::size_t>(q) * q * q);
  std::vector<Vec3> w_grad(w_eta.size());
  std::vector<Vec3> offs(w_eta.size());
  double mass = 0.0;
  {
    std::size_t idx = 0;
    for (int i = 0; i < q; ++i) {
      for (int j = 0; j < q; ++j) {
        for (int k = 0; k < q; ++k, ++idx) {
          const Vec3 y{rule.nodes[i], rule.nodes[j], rule.nodes[k]};
          const double w = rule.weights[i] * rule.weights[j] * rule.weights[k];
          offs[idx] = y;
          w_eta[idx] = w * moll.eta(y);
          w_grad[idx] = w * moll.grad_eta(y);
          mass += w_eta[idx];
        }
      }
    }
    const double scale = 1.0 / mass;
    double moment = 0.0;
    for (std::size_t i = 0; i < w_eta.size(); ++i) {
      w_eta[i] *= scale;
      w_grad[i] = scale * w_grad[i];
      moment += dot(w_grad[i], offs[i]);
    }
    // same first-moment fix as the mollified-field tables
    const double grad_scale = -3.0 / moment;
    for (auto& g : w_grad) g *= grad_scale;
  }

  const Domain& omega = field.domain;
  auto rho_ext = [&](const Vec3& x) {
    return contains(omega, x) ? rho(x) : 0.0;
  };

  GridFunction g;
  g.box = spec.box;
  g.cells = spec.cells;
  g.values.assign(static_cast<std::size_t>(spec.cells) * spec.cells * spec.cells,
                  0.0);
  for (int i = 0; i < g.cells; ++i) {
    for (int j = 0; j < g.cells; ++j) {
      for (int k = 0; k < g.cells; ++k) {
        const Vec3 x = g.cell_center(i, j, k);
        // every term carries a factor of v (or its divergence) under the
        // kernel, so the commutator vanishes beyond the eps-dilated support
        if (distance_to(field.support, x) >= eps) continue;
        Vec3 grad_rho_eps{};
        double div_rho_v = 0.0;
        double smooth_rho_div = 0.0;
        for (std::size_t idx = 0; idx < w_eta.size(); ++idx) {
          const Vec3 xm = x - offs[idx];
          const double rm = rho_ext(xm);
          if (rm == 0.0) continue;
          grad_rho_eps += rm * w_grad[idx];
          const Vec3 vm = field.velocity(t, xm);
          div_rho_v += rm * dot(w_grad[idx], vm);
          smooth_rho_div += w_eta[idx] * rm * field.divergence(t, xm);
        }
        const Vec3 vx = field.velocity(t, x);
        g.at(i, j, k) = -dot(grad_rho_eps, vx) + div_rho_v - smooth_rho_div;
      }
    }
  }
  return g;
}

TestFunction spacetime_bump(double t_center, double t_radius,
                            const Vec3& x_center, double x_radius) {
  if (t_radius <= 0.0 || x_radius <= 0.0) {
    throw std::invalid_argument("bump radii must be positive");
  }
  TestFunction f;
  f.support_t_lo = t_center - t_radius;
  f.support_t_hi = t_center + t_radius;
  f.space_support = Domain::ball(x_center, x_radius);
  auto tq = [t_center, t_radius](double t) {
    const double u = (t - t_center) / t_radius;
    return u * u;
  };
  auto xq = [x_center, x_radius](const Vec3& x) {
    return (x - x_center).norm2() / (x_radius * x_radius);
  };
  f.value = [tq, xq](double t, const Vec3& x) {
    return bump_profile(tq(t)) * bump_profile(xq(x));
  };
  f.dt = [tq, xq, t_center, t_radius](double t, const Vec3& x) {
    const double u = (t - t_center) / t_radius;
    return bump_profile_deriv(tq(t)) * (2.0 * u / t_radius) *
           bump_profile(xq(x));
  };
  f.grad = [tq, xq, x_center, x_radius](double t, const Vec3& x) {
    const double scale = bump_profile(tq(t)) * bump_profile_deriv(xq(x)) * 2.0 /
                         (x_radius * x_radius);
    return scale * (x - x_center);
  };
  return f;
}

namespace {

// one-sided weak-form integral over [a, b] (a < b), sign = +1 when the window
// sits after the initial time, -1 before
double weak_half(const TransportSolution& solution, const VelocityField& field,
                 const InitialDatum& rho0, const TestFunction& testfn, double a,
                 double b, double sign, const GridSpec& space_grid,
                 int time_segments) {
  const double lo = std::max(a, testfn.support_t_lo);
  const double hi = std::min(b, testfn.support_t_hi);

  GridFunction probe;
  probe.box = space_grid.box;
  probe.cells = space_grid.cells;
  probe.values.assign(1, 0.0);  // only geometry helpers are used
  const double wcell = probe.cell_volume();

  std::vector<Vec3> cells;
  for (int i = 0; i < space_grid.cells; ++i) {
    for (int j = 0; j < space_grid.cells; ++j) {
      for (int k = 0; k < space_grid.cells; ++k) {
        const Vec3 x = probe.cell_center(i, j, k);
        if (!contains(field.domain, x)) continue;
        if (testfn.space_support && !contains(*testfn.space_support, x)) {
          continue;
        }
        cells.push_back(x);
      }
    }
  }

  double acc = 0.0;
  if (lo < hi) {
    const QuadRule& gl = gauss_legendre(4);
    for (int seg = 0; seg < time_segments; ++seg) {
      const double r0 = lo + (hi - lo) * seg / time_segments;
      const double r1 = lo + (hi - lo) * (seg + 1) / time_segments;
      const QuadRule rule = scaled_rule(gl, r0, r1);
      for (std::size_t qi = 0; qi < rule.nodes.size(); ++qi) {
        const double r = rule.nodes[qi];
        double space = 0.0;
        for (const Vec3& x : cells) {
          const double phi = testfn.value(r, x);
          const double phit = testfn.dt(r, x);
          const Vec3 grad = testfn.grad(r, x);
          if (phi == 0.0 && phit == 0.0 && grad.norm2() == 0.0) continue;
          const double rho = solution.evaluate(r, x);
          if (rho == 0.0) continue;
          const Vec3 v = field.velocity(r, x);
          space += rho * (phit + dot(v, grad) + field.divergence(r, x) * phi);
        }
        acc += rule.weights[qi] * wcell * space;
      }
    }
  }

  double init = 0.0;
  for (const Vec3& x : cells) {
    const double phi = testfn.value(solution.s, x);
    if (phi == 0.0) continue;
    init += rho0.evaluate(x) * phi;
  }
  return acc + sign * wcell * init;
}

}  // namespace

double weak_residual(const TransportSolution& solution,
                     const VelocityField& field, const InitialDatum& rho0,
                     const TestFunction& testfn, double t_lo, double t_hi,
                     const GridSpec& space_grid, int time_segments) {
  validate_grid_spec(space_grid);
  if (time_segments < 1) throw std::invalid_argument("need >= 1 time segment");
  const double s = solution.s;
  if (t_lo > s || t_hi < s) {
    throw std::invalid_argument("window must contain the initial time");
  }
  const double fwd = weak_half(solution, field, rho0, testfn, s, t_hi, +1.0,
                               space_grid, time_segments);
  const double bwd = weak_half(solution, field, rho0, testfn, t_lo, s, -1.0,
                               space_grid, time_segments);
  return std::fabs(fwd) + std::fabs(bwd);
}

std::vector<double> rho_convergence_study(const VelocityField& field,
                                          const InitialDatum& rho0, double s,
                                          double t,
                                          const std::vector<double>& eps_list,
                                          std::uint64_t n, std::uint64_t seed,
                                          const Enclosure& enclosure,
                                          double step_size, int order) {
  if (eps_list.size() < 2) {
    throw std::invalid_argument("need at least two radii");
  }
  for (std::size_t i = 0; i + 1 < eps_list.size(); ++i) {
    if (eps_list[i + 1] >= eps_list[i]) {
      throw std::invalid_argument("radii must decrease strictly");
    }
  }
  const Domain& omega = field.domain;
  Rng rng(seed, Rng::stream_of("transport.rhoconv"));
  std::vector<Vec3> samples(n);
  for (std::uint64_t j = 0; j < n; ++j) samples[j] = sample_point(omega, rng, j);

  std::vector<std::vector<double>> vals(eps_list.size());
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const auto mf = mollify(field, enclosure, eps_list[e], order).as_field();
    const FlowEvaluator flow = make_flow(mf, enclosure, step_size);
    vals[e].resize(n);
    for (std::uint64_t j = 0; j < n; ++j) {
      vals[e][j] = rho0.evaluate(flow_endpoint(flow, t, samples[j], s));
    }
  }
  std::vector<double> dists;
  for (std::size_t e = 0; e + 1 < eps_list.size(); ++e) {
    std::vector<double> sq(n);
    for (std::uint64_t j = 0; j < n; ++j) {
      const double d = vals[e][j] - vals[e + 1][j];
      sq[j] = d * d;
    }
    dists.push_back(std::sqrt(omega.exact_volume * mean_of(sq)));
  }
  return dists;
}

}  // namespace flowlab
