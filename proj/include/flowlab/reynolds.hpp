#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "flowlab/flow.hpp"
#include "flowlab/geometry.hpp"
#include "flowlab/vec3.hpp"

namespace flowlab {

// One checked transport identity.  residual = |lhs - rhs|.  mc_sigma is the
// root-sum-square of the standard errors of the individual Monte Carlo
// terms; since all terms share the same sample points, the RSS overstates
// the error of their difference.  quad_tol bounds the deterministic part of
// the budget (composite trapezoid in time, estimated a posteriori from
// second differences of the node means, floored at 1e-12).
struct ReynoldsReport {
  std::string identity_tag;  // trans0..trans3, usi1, usi2, cov
  double s = 0.0;
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double mc_sigma = 0.0;
  double quad_tol = 0.0;
  int time_quadrature_nodes = 0;
  std::uint64_t seed = 0;
};

// C1 test density g(time, point) with caller-supplied derivatives.
struct DensityFunction {
  std::function<double(double, const Vec3&)> g;
  std::function<double(double, const Vec3&)> dg_dt;
  std::function<Vec3(double, const Vec3&)> grad_g;
};

DensityFunction constant_density(double value);

// Max mismatch between the supplied derivatives and central differences of
// g at `probes` random space-time points, each normalized by 1 + |value|.
// The density ops call this as an entry gate (tolerance 1e-4, 100 probes).
double density_derivative_defect(const DensityFunction& g,
                                 const Domain& region, double t_lo,
                                 double t_hi, int probes, std::uint64_t seed);

// meas{x in Omega : X(s,t,x) in A}, by uniform sampling of Omega.
MeasureEstimate measure_preimage(const FlowEvaluator& flow, double s, double t,
                                 const MeasurableSet& set, std::uint64_t n,
                                 std::uint64_t seed);

// Forward-image measure through the round-trip characterization
// meas(X(s,t,A)) = meas(X(t,s,.)^{-1}(A)): the preimage estimator with the
// two times swapped.
MeasureEstimate measure_image(const FlowEvaluator& flow, double s, double t,
                              const MeasurableSet& set, std::uint64_t n,
                              std::uint64_t seed);

// Independent second estimator: int_A |det dX(s,t,x)/dx| dx, by averaging
// exp(jacobian_log) over samples of A.  Uses the set's direct sampler (with
// its exact volume) when both are present, otherwise rejection from Omega.
MeasureEstimate measure_image_jacobian(const FlowEvaluator& flow, double s,
                                       double t, const MeasurableSet& set,
                                       std::uint64_t n, std::uint64_t seed);

// Which side of the volume-evolution identity the moving set lives on:
// trans1 pushes A forward (Jacobian-weighted samples of A), trans0 pulls A
// back (membership of advected Omega samples).
enum class MeasureVariant { trans1, trans0 };
enum class DensityVariant { trans2, trans3 };

// Volume evolution: meas at the endpoint vs meas(A) plus the time integral
// of int div v over the moving set.  Common random numbers across all
// quadrature nodes and both sides.
ReynoldsReport rtt_measure_residual(const FlowEvaluator& flow, double s,
                                    double t, const MeasurableSet& set,
                                    int time_nodes, std::uint64_t n,
                                    std::uint64_t seed, MeasureVariant variant);

// Density transport: int g over the moving set at the endpoint vs the base
// integral plus the time integral of dg_dt + g div v + v . grad g over the
// moving set.  With g identically 1 this reduces to rtt_measure_residual
// bitwise (same code path, same streams).
ReynoldsReport rtt_density_residual(const FlowEvaluator& flow,
                                    const DensityFunction& g, double s,
                                    double t, const MeasurableSet& set,
                                    int time_nodes, std::uint64_t n,
                                    std::uint64_t seed, DensityVariant variant);

// The same two identities reported under the classical tags, for runs where
// the driving field is smooth and the statement is the textbook transport /
// volume pair rather than its rough-field extension.
ReynoldsReport classical_density_residual(const FlowEvaluator& flow,
                                          const DensityFunction& g, double s,
                                          double t, const MeasurableSet& set,
                                          int time_nodes, std::uint64_t n,
                                          std::uint64_t seed);  // tag usi1
ReynoldsReport classical_measure_residual(const FlowEvaluator& flow, double s,
                                          double t, const MeasurableSet& set,
                                          int time_nodes, std::uint64_t n,
                                          std::uint64_t seed);  // tag usi2

// Change of variables over the enclosure ball K (the driving field vanishes
// near its boundary):
//   int_K f(X(s,t,x)) dx = int_K f + int_s^t int_K f(X(s,r,x)) div v(r,x) dx dr.
// Both sides share one set of K-samples; tag cov.
ReynoldsReport change_of_variables_check(
    const FlowEvaluator& flow, const std::function<double(const Vec3&)>& f,
    double s, double t, int time_nodes, std::uint64_t n, std::uint64_t seed);

struct LimitStudyRow {
  double eps = 0.0;
  MeasureEstimate preimage;        // meas(X_eps(s,t,.)^{-1}(A))
  MeasureEstimate image;           // time-swapped preimage estimate
  MeasureEstimate image_jacobian;  // Jacobian-weighted estimate
  // |value - previous row's value| per column; 0 on the first row.  The
  // indicator columns move in quanta of vol(Omega)/n, so at practical n the
  // Jacobian column is the one that resolves small mollification bias.
  double preimage_difference = 0.0;
  double image_difference = 0.0;
  double jacobian_difference = 0.0;
};

// Measure estimates along a decreasing mollification ladder, common samples
// across all radii; successive differences expose the Cauchy behavior.
std::vector<LimitStudyRow> rtt_limit_study(
    const VelocityField& base_field, const std::vector<double>& eps_list,
    double s, double t, const MeasurableSet& set, const Enclosure& enclosure,
    double step_size, std::uint64_t n, std::uint64_t seed, int order = 12);

// Sample-level containment: for x in A, the round trip
// z = X(t,s,X(s,t,x)) must land in A dilated by delta = 10 * (max round-trip
// distance over the same samples).
struct ContainmentReport {
  std::size_t checked = 0;      // samples that landed in A
  std::size_t violations = 0;   // round trips outside the dilated set
  double delta = 0.0;
  double worst_defect = 0.0;    // max |z - x|
};

ContainmentReport containment_check(const FlowEvaluator& flow, double s,
                                    double t, const MeasurableSet& set,
                                    std::uint64_t n, std::uint64_t seed);

// Two-sided compressibility bound on the preimage measure:
//   meas(A)/c - 4 sigma <= estimate <= c meas(A) + 4 sigma
// with c = exp(div bound * |t - s|) from the field's analytic data.
struct SandwichReport {
  double estimate = 0.0;
  double sigma = 0.0;       // std error of the preimage estimate
  double set_measure = 0.0; // exact when the set carries one, else estimated
  double c = 1.0;
  double lower = 0.0;
  double upper = 0.0;
  bool inside = false;
};

SandwichReport compressibility_sandwich(const FlowEvaluator& flow, double s,
                                        double t, const MeasurableSet& set,
                                        std::uint64_t n, std::uint64_t seed);

// identity_tag,s,t,lhs,rhs,residual,mc_sigma,nodes,seed
void write_reynolds_csv(const std::vector<ReynoldsReport>& reports,
                        const std::string& path);

// fixed-width table for logs
std::string format_reynolds_table(const std::vector<ReynoldsReport>& reports);

}  // namespace flowlab
