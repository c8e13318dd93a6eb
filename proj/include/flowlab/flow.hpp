#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowlab/fields.hpp"
#include "flowlab/geometry.hpp"
#include "flowlab/vec3.hpp"

namespace flowlab {

// Fixed-grid classical RK4 over the enclosure; immutable once built.
struct FlowEvaluator {
  VelocityField field;
  Enclosure enclosure;
  double step_size = 1e-3;
};

FlowEvaluator make_flow(VelocityField field, Enclosure enclosure,
                        double step_size);

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<Vec3> positions;
  std::vector<double> jacobian_log;  // running time integral of div along path

  const Vec3& endpoint() const { return positions.back(); }
  double jacobian_log_end() const { return jacobian_log.back(); }
};

// endpoint-only variant for bulk Monte Carlo work
struct FlowPoint {
  Vec3 position;
  double jacobian_log = 0.0;
};

class TrajectoryEscape : public std::runtime_error {
 public:
  TrajectoryEscape(const std::string& what, double time, Vec3 where)
      : std::runtime_error(what), time_(time), where_(where) {}
  double time() const { return time_; }
  const Vec3& where() const { return where_; }

 private:
  double time_;
  Vec3 where_;
};

// Trajectory of gamma' = v(r, gamma), gamma(t) = x0, reported at s.
// Stores every integration node.
TrajectoryRecord advect(const FlowEvaluator& flow, double t, const Vec3& x0,
                        double s);

FlowPoint advect_endpoint(const FlowEvaluator& flow, double t, const Vec3& x0,
                          double s);

// endpoint without the divergence accumulation (cheaper, same positions)
Vec3 flow_endpoint(const FlowEvaluator& flow, double t, const Vec3& x0,
                   double s);

// Positions and jacobian logs at a sorted list of intermediate times;
// checkpoints[i] must be monotone from t toward s (t and s included by the
// caller if wanted).  Each leg gets its own uniform grid of width <=
// step_size.
std::vector<FlowPoint> advect_checkpoints(const FlowEvaluator& flow, double t,
                                          const Vec3& x0,
                                          const std::vector<double>& checkpoints);

std::vector<Vec3> flow_map(const FlowEvaluator& flow, double s, double t,
                           const std::vector<Vec3>& points);

struct DefectStats {
  double max = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
};

// round trip x -> X(s,t,x) -> X(t,s,.) compared with x
DefectStats group_defect(const FlowEvaluator& flow, double s, double t,
                         const std::vector<Vec3>& points);

// |X(s,t,x) - X(s,tau,X(tau,t,x))|
DefectStats semigroup_defect(const FlowEvaluator& flow, double s, double tau,
                             double t, const std::vector<Vec3>& points);

struct IntegralEquationReport {
  double residual = 0.0;
  double expected_bound = 0.0;  // C * step^2 consistency bound
};

IntegralEquationReport integral_equation_residual(const FlowEvaluator& flow,
                                                  double t, const Vec3& x0,
                                                  double s, int quad_nodes);

// mass of X(t,s,A) that ends up outside Omega, by Jacobian-weighted samples
MeasureEstimate leak_measure(const FlowEvaluator& flow, double s, double t,
                             const MeasurableSet& set, std::uint64_t n,
                             std::uint64_t seed);

// writes columns r,x1,x2,x3,jac_log
void write_trajectory_csv(const TrajectoryRecord& record, const std::string& path);

}  // namespace flowlab
