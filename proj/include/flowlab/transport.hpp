#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flowlab/fields.hpp"
#include "flowlab/flow.hpp"
#include "flowlab/geometry.hpp"

namespace flowlab {

struct InitialDatum {
  enum class Kind { Coordinate, SmoothBump, IndicatorMollified };
  Kind kind = Kind::SmoothBump;
  std::string label;
  std::function<double(const Vec3&)> evaluate;
  double sup_bound = 1.0;  // beta, valid on all of K
};

InitialDatum coordinate_datum(int axis, double sup_bound);
// C-infinity bump: amplitude at center, identically zero outside the ball
InitialDatum smooth_bump_datum(const Vec3& center, double radius,
                               double amplitude);
// ball indicator convolved with the bump kernel of radius delta (radial
// closed form, so no 3-D quadrature is involved in evaluation)
InitialDatum mollified_indicator_datum(const Vec3& center, double radius,
                                       double delta);

struct TransportSolution {
  double s = 0.0;  // initial time of the PDE
  std::string field_tag;
  std::string provenance;  // "lagrangian" or "eulerian"
  std::function<double(double, const Vec3&)> evaluate;
};

// rho(s,t,x) = rho0(X(s,t,x)) pointwise on demand
TransportSolution lagrangian_solution(FlowEvaluator flow, InitialDatum rho0,
                                      double s);

std::vector<double> solve_lagrangian(const FlowEvaluator& flow,
                                     const InitialDatum& rho0, double s,
                                     double t, const std::vector<Vec3>& points);

struct GridSpec {
  Domain box;  // must be box kind and cover Omega
  int cells = 64;
  std::optional<double> dt;  // substep; defaults to the CFL bound
};

struct GridFunction {
  Domain box;
  int cells = 0;
  std::vector<double> values;  // (i*cells + j)*cells + k

  double cell_width(int axis) const;
  double cell_volume() const;
  Vec3 cell_center(int i, int j, int k) const;
  double& at(int i, int j, int k);
  double at(int i, int j, int k) const;
  double l1_norm() const;  // cell volume times sum of |values|
  double l2_norm() const;
};

GridFunction sample_on_grid(const std::function<double(const Vec3&)>& f,
                            const GridSpec& spec);

// first-order dimension-split upwind advection of d rho/dt + v.grad rho = 0;
// integrates from time s to time t (either direction)
GridFunction solve_eulerian(const VelocityField& field, const InitialDatum& rho0,
                            double s, double t, const GridSpec& spec);

TransportSolution eulerian_solution(VelocityField field, InitialDatum rho0,
                                    double s, GridSpec spec);

struct NormEvolutionReport {
  double t = 0.0;
  double lhs = 0.0;       // MC of the squared norm at t
  double rhs = 0.0;       // MC of the squared norm at s plus the time integral
  double residual = 0.0;  // |lhs - rhs|
  double mc_sigma = 0.0;  // std error of the per-sample residual
};

// squared-norm evolution law along the flow, one report per requested time;
// all times share one sample set and one trajectory family
std::vector<NormEvolutionReport> l2_identity_residual(
    const FlowEvaluator& flow, const InitialDatum& rho0, double s,
    const std::vector<double>& times, std::uint64_t n, std::uint64_t seed,
    int nodes_per_unit_time = 16);

// smoothing-transport commutator on a grid:
//   R_eps = -grad(eta_eps * rho) . v + div(eta_eps * (rho v)) - eta_eps * (rho div v)
// rho is zero-extended outside Omega before convolving
GridFunction commutator_field(const VelocityField& field,
                              const std::function<double(const Vec3&)>& rho,
                              double eps, double t, const GridSpec& spec,
                              const Enclosure& enclosure, int order = 12);

struct TestFunction {
  std::function<double(double, const Vec3&)> value;
  std::function<double(double, const Vec3&)> dt;
  std::function<Vec3(double, const Vec3&)> grad;
  // support bounds let the quadratures skip regions that contribute nothing
  double support_t_lo = -1e300;
  double support_t_hi = 1e300;
  std::optional<Domain> space_support;
};

// smooth space-time bump with analytic derivatives, supported in
// |t - t_center| < t_radius, |x - x_center| < x_radius
TestFunction spacetime_bump(double t_center, double t_radius,
                            const Vec3& x_center, double x_radius);

// residual of the weak form of the transport equation over the window
// [t_lo, t_hi] containing the initial time of the solution; returns
// |forward part| + |backward part|
double weak_residual(const TransportSolution& solution,
                     const VelocityField& field, const InitialDatum& rho0,
                     const TestFunction& testfn, double t_lo, double t_hi,
                     const GridSpec& space_grid, int time_segments);

// successive MC L2 distances between solutions driven by mollified fields at
// consecutive radii from eps_list (common samples)
std::vector<double> rho_convergence_study(const VelocityField& field,
                                          const InitialDatum& rho0, double s,
                                          double t,
                                          const std::vector<double>& eps_list,
                                          std::uint64_t n, std::uint64_t seed,
                                          const Enclosure& enclosure,
                                          double step_size, int order = 10);

}  // namespace flowlab
