#include "flowlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "flowlab/csv.hpp"
#include "flowlab/fields.hpp"
#include "flowlab/flow.hpp"
#include "flowlab/geometry.hpp"
#include "flowlab/reynolds.hpp"
#include "flowlab/summation.hpp"
#include "flowlab/transport.hpp"

namespace flowlab {

namespace {

struct Scenario {
  VelocityField field;
  Enclosure enclosure;
  FlowEvaluator flow;
  std::vector<MeasurableSet> sets;
  bool smooth = false;  // the classical (C^1) identities apply
};

Scenario resolve(const ScenarioConfig& cfg) {
  if (cfg.sets.empty()) {
    throw std::invalid_argument("config has no sets");
  }
  if (cfg.time_pairs.empty()) {
    throw std::invalid_argument("config has no time pairs");
  }
  Scenario sc;
  sc.field = cfg.build_field();
  sc.enclosure = make_enclosure(sc.field.domain, cfg.eps_max);
  sc.flow = make_flow(cfg.build_field(), sc.enclosure, cfg.step_size);
  for (const SetSpec& spec : cfg.sets) sc.sets.push_back(spec.build());
  sc.smooth = cfg.field_name != "rough_shear";
  return sc;
}

// keeps the worst entry per label; a property check can force the verdict
void record(SuiteResult& suite, const std::string& label, double value,
            double tolerance, int forced = -1) {
  const bool ok = forced >= 0 ? forced != 0 : value <= tolerance;
  suite.passed = suite.passed && ok;
  for (CheckResult& c : suite.checks) {
    if (c.label != label) continue;
    const bool worse = (!ok && c.passed) ||
                       (ok == c.passed && value - tolerance > c.value - c.tolerance);
    if (worse) {
      c.value = value;
      c.tolerance = tolerance;
    }
    c.passed = c.passed && ok;
    return;
  }
  suite.checks.push_back({label, value, tolerance, ok});
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i + 1] >= v[i]) return false;
  }
  return true;
}

double worst_increment(const std::vector<double>& v) {
  double worst = -1e300;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    worst = std::max(worst, v[i + 1] - v[i]);
  }
  return v.size() < 2 ? 0.0 : worst;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

SuiteResult run_flow_diagnostics(const ScenarioConfig& cfg, const Scenario& sc,
                                 const std::string& csv_path) {
  SuiteResult suite;
  suite.suite = "flow-diagnostics";
  suite.csv_path = csv_path;
  const double defect_tol = sc.smooth ? 1e-6 : 1e-4;

  const TimePair first = cfg.time_pairs.front();
  const TrajectoryRecord traj =
      advect(sc.flow, first.t, cfg.sets.front().center, first.s);
  write_trajectory_csv(traj, csv_path);

  const std::uint64_t n_pts = std::min<std::uint64_t>(cfg.samples, 2000);
  const auto points = sample_uniform(sc.field.domain, n_pts, cfg.seed);
  const std::uint64_t n_mc = std::min<std::uint64_t>(cfg.samples, 20000);

  for (const TimePair& pr : cfg.time_pairs) {
    const DefectStats round_trip = group_defect(sc.flow, pr.s, pr.t, points);
    record(suite, "group_defect", round_trip.max, defect_tol);
    const DefectStats chained =
        semigroup_defect(sc.flow, pr.s, 0.5 * (pr.s + pr.t), pr.t, points);
    record(suite, "semigroup_defect", chained.max, defect_tol);

    for (const MeasurableSet& set : sc.sets) {
      const ContainmentReport cont =
          containment_check(sc.flow, pr.s, pr.t, set, n_mc, cfg.seed);
      record(suite, "containment_violations",
             static_cast<double>(cont.violations), 0.0);
      record(suite, "containment_delta", cont.delta, 1e-6);

      const SandwichReport sw =
          compressibility_sandwich(sc.flow, pr.s, pr.t, set, n_mc, cfg.seed);
      record(suite, "compressibility_sandwich", sw.inside ? 0.0 : 1.0, 0.0);

      const MeasureEstimate leak = leak_measure(
          sc.flow, pr.s, pr.t, set, std::min<std::uint64_t>(cfg.samples, 5000),
          cfg.seed);
      record(suite, "boundary_leak", leak.value, 1e-12);
    }
  }
  return suite;
}

SuiteResult run_transport(const ScenarioConfig& cfg, const Scenario& sc,
                          const std::string& csv_path) {
  SuiteResult suite;
  suite.suite = "transport";
  suite.csv_path = csv_path;

  const Domain& dom = sc.field.domain;
  const InitialDatum rho0 =
      smooth_bump_datum(dom.center, 0.5 * dom.circumscribed_radius(), 1.0);

  const TimePair pr = cfg.time_pairs.front();
  const double lo = std::min(pr.s, pr.t);
  const double hi = std::max(pr.s, pr.t);
  std::vector<double> times;
  if (hi == lo) {
    times.push_back(lo);
  } else {
    for (int k = 1; k <= 5; ++k) {
      times.push_back(lo + (hi - lo) * (static_cast<double>(k) / 5.0));
    }
  }

  const std::uint64_t n = std::min<std::uint64_t>(cfg.samples, 20000);
  const auto reports =
      l2_identity_residual(sc.flow, rho0, lo, times, n, cfg.seed, 64);

  std::ofstream out = open_csv(csv_path);
  out << "t,lhs,rhs,residual,mc_sigma\n";
  for (const NormEvolutionReport& r : reports) {
    out << csv_format(r.t) << ',' << csv_format(r.lhs) << ','
        << csv_format(r.rhs) << ',' << csv_format(r.residual) << ','
        << csv_format(r.mc_sigma) << '\n';
    record(suite, "l2_norm_evolution", r.residual,
           4.0 * r.mc_sigma + 1e-3 * std::fabs(r.lhs) + 1e-9);
  }
  return suite;
}

SuiteResult run_commutator(const ScenarioConfig& cfg, const Scenario& sc,
                           const std::string& csv_path) {
  SuiteResult suite;
  suite.suite = "commutator";
  suite.csv_path = csv_path;

  const Domain& dom = sc.field.domain;
  const double radius = dom.circumscribed_radius();
  const InitialDatum rho = smooth_bump_datum(dom.center, 0.5 * radius, 1.0);
  GridSpec spec;
  spec.box = Domain::box(dom.center,
                         {1.05 * radius, 1.05 * radius, 1.05 * radius});
  spec.cells = cfg.grid_cells;
  const double t0 = cfg.time_pairs.front().t;

  std::vector<double> l1;
  for (const double eps : cfg.eps_list) {
    l1.push_back(
        commutator_field(sc.field, rho.evaluate, eps, t0, spec, sc.enclosure, 10)
            .l1_norm());
  }

  std::ofstream out = open_csv(csv_path);
  out << "eps,l1_norm\n";
  for (std::size_t i = 0; i < l1.size(); ++i) {
    out << csv_format(cfg.eps_list[i]) << ',' << csv_format(l1[i]) << '\n';
  }

  if (l1.size() < 2) {
    suite.notes.push_back("single eps entry, no decay to check");
    record(suite, "commutator_l1_decay", 0.0, 0.0, 1);
  } else {
    const bool ok = max_abs(l1) <= 1e-14 || strictly_decreasing(l1);
    record(suite, "commutator_l1_decay", worst_increment(l1), 0.0, ok ? 1 : 0);
  }
  return suite;
}

SuiteResult run_reynolds(const ScenarioConfig& cfg, const Scenario& sc,
                         const std::string& csv_path) {
  SuiteResult suite;
  suite.suite = "reynolds";
  suite.csv_path = csv_path;

  DensityFunction g;
  g.g = [](double t, const Vec3& x) { return x.x * x.x + t; };
  g.dg_dt = [](double, const Vec3&) { return 1.0; };
  g.grad_g = [](double, const Vec3& x) { return Vec3{2.0 * x.x, 0.0, 0.0}; };

  const Domain& dom = sc.field.domain;
  const InitialDatum f =
      smooth_bump_datum(dom.center, 0.5 * dom.circumscribed_radius(), 1.0);

  std::vector<ReynoldsReport> reports;
  for (const TimePair& pr : cfg.time_pairs) {
    for (const MeasurableSet& set : sc.sets) {
      reports.push_back(rtt_measure_residual(sc.flow, pr.s, pr.t, set,
                                             cfg.time_nodes, cfg.samples,
                                             cfg.seed, MeasureVariant::trans1));
      reports.push_back(rtt_measure_residual(sc.flow, pr.s, pr.t, set,
                                             cfg.time_nodes, cfg.samples,
                                             cfg.seed, MeasureVariant::trans0));
      reports.push_back(rtt_density_residual(sc.flow, g, pr.s, pr.t, set,
                                             cfg.time_nodes, cfg.samples,
                                             cfg.seed, DensityVariant::trans2));
      reports.push_back(rtt_density_residual(sc.flow, g, pr.s, pr.t, set,
                                             cfg.time_nodes, cfg.samples,
                                             cfg.seed, DensityVariant::trans3));
      if (sc.smooth) {
        reports.push_back(classical_measure_residual(
            sc.flow, pr.s, pr.t, set, cfg.time_nodes, cfg.samples, cfg.seed));
        reports.push_back(classical_density_residual(
            sc.flow, g, pr.s, pr.t, set, cfg.time_nodes, cfg.samples, cfg.seed));
      }
    }
    reports.push_back(change_of_variables_check(sc.flow, f.evaluate, pr.s, pr.t,
                                                cfg.time_nodes, cfg.samples,
                                                cfg.seed));
  }

  write_reynolds_csv(reports, csv_path);
  for (const ReynoldsReport& rep : reports) {
    record(suite, rep.identity_tag, rep.residual,
           4.0 * rep.mc_sigma + rep.quad_tol + 1e-12);
  }
  return suite;
}

SuiteResult run_convergence(const ScenarioConfig& cfg, const Scenario& sc,
                            const std::string& csv_path) {
  SuiteResult suite;
  suite.suite = "convergence";
  suite.csv_path = csv_path;

  const TimePair pr = cfg.time_pairs.front();
  const std::uint64_t n = cfg.convergence_samples;
  const double h = cfg.convergence_step;
  const int order = cfg.mollifier_order;
  const Domain& dom = sc.field.domain;

  // endpoint families under each mollified field, common start points
  const auto pts = sample_uniform(dom, n, cfg.seed);
  std::vector<std::vector<Vec3>> ends;
  for (const double eps : cfg.eps_list) {
    const MollifiedField mf = mollify(sc.field, sc.enclosure, eps, order);
    const FlowEvaluator flow = make_flow(mf.as_field(), sc.enclosure, h);
    ends.push_back(flow_map(flow, pr.s, pr.t, pts));
  }
  std::vector<double> flow_l2;
  for (std::size_t i = 0; i + 1 < ends.size(); ++i) {
    std::vector<double> sq(pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j) {
      sq[j] = (ends[i][j] - ends[i + 1][j]).norm2();
    }
    flow_l2.push_back(std::sqrt(dom.exact_volume * mean_of(sq)));
  }

  const InitialDatum rho0 = coordinate_datum(0, dom.circumscribed_radius());
  const std::vector<double> rho_l2 =
      rho_convergence_study(sc.field, rho0, pr.t, pr.s, cfg.eps_list, n,
                            cfg.seed, sc.enclosure, h, order);

  const std::vector<LimitStudyRow> rows =
      rtt_limit_study(sc.field, cfg.eps_list, pr.s, pr.t, sc.sets.front(),
                      sc.enclosure, h, n, cfg.seed, order);

  std::vector<double> pre_diff, jac_diff;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    pre_diff.push_back(rows[i].preimage_difference);
    jac_diff.push_back(rows[i].jacobian_difference);
  }

  std::ofstream out = open_csv(csv_path);
  out << "eps_from,eps_to,flow_l2,rho_l2,preimage_diff,jacobian_diff\n";
  for (std::size_t i = 0; i + 1 < cfg.eps_list.size(); ++i) {
    out << csv_format(cfg.eps_list[i]) << ',' << csv_format(cfg.eps_list[i + 1])
        << ',' << csv_format(flow_l2[i]) << ',' << csv_format(rho_l2[i]) << ','
        << csv_format(pre_diff[i]) << ',' << csv_format(jac_diff[i]) << '\n';
  }

  if (flow_l2.size() < 2) {
    suite.notes.push_back("two eps entries give a single distance, nothing to compare");
    record(suite, "flow_map_cauchy", 0.0, 0.0, 1);
    record(suite, "rho_cauchy", 0.0, 0.0, 1);
    record(suite, "measure_cauchy", 0.0, 0.0, 1);
    return suite;
  }

  const bool flow_ok = max_abs(flow_l2) <= 1e-14 || strictly_decreasing(flow_l2);
  record(suite, "flow_map_cauchy", worst_increment(flow_l2), 0.0, flow_ok ? 1 : 0);
  const bool rho_ok = max_abs(rho_l2) <= 1e-14 || strictly_decreasing(rho_l2);
  record(suite, "rho_cauchy", worst_increment(rho_l2), 0.0, rho_ok ? 1 : 0);

  // the membership column moves in quanta of vol(Omega)/n, so either
  // estimator route counts as convergence evidence
  const bool measure_ok = (max_abs(pre_diff) <= 1e-14 && max_abs(jac_diff) <= 1e-14) ||
                          strictly_decreasing(pre_diff) ||
                          strictly_decreasing(jac_diff);
  record(suite, "measure_cauchy",
         std::min(worst_increment(pre_diff), worst_increment(jac_diff)), 0.0,
         measure_ok ? 1 : 0);
  return suite;
}

}  // namespace

RunSummary run(const ScenarioConfig& cfg) {
  const auto wall0 = std::chrono::steady_clock::now();
  RunSummary summary;

  const std::filesystem::path out_dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + cfg.out_dir +
                             "': " + ec.message());
  }

  const Scenario sc = resolve(cfg);

  for (const std::string& name : cfg.suites) {
    const std::string csv_path = (out_dir / (name + ".csv")).string();
    SuiteResult suite;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (name == "flow-diagnostics") {
        suite = run_flow_diagnostics(cfg, sc, csv_path);
      } else if (name == "transport") {
        suite = run_transport(cfg, sc, csv_path);
      } else if (name == "commutator") {
        suite = run_commutator(cfg, sc, csv_path);
      } else if (name == "reynolds") {
        suite = run_reynolds(cfg, sc, csv_path);
      } else if (name == "convergence") {
        suite = run_convergence(cfg, sc, csv_path);
      } else {
        throw std::invalid_argument("unknown suite '" + name + "'");
      }
    } catch (const TrajectoryEscape& e) {
      suite.suite = name;
      suite.csv_path = csv_path;
      suite.passed = false;
      suite.notes.push_back(std::string("aborted by trajectory escape: ") +
                            e.what());
      suite.checks.push_back({"abort", 1.0, 0.0, false});
    } catch (const std::exception& e) {
      suite.suite = name;
      suite.csv_path = csv_path;
      suite.passed = false;
      suite.notes.push_back(std::string("aborted: ") + e.what());
      suite.checks.push_back({"abort", 1.0, 0.0, false});
    }
    suite.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    summary.passed = summary.passed && suite.passed;
    summary.suites.push_back(std::move(suite));
  }

  const std::string summary_path = (out_dir / "summary.csv").string();
  std::ofstream out = open_csv(summary_path);
  out << "suite,check,value,tolerance,status\n";
  for (const SuiteResult& suite : summary.suites) {
    for (const CheckResult& c : suite.checks) {
      out << suite.suite << ',' << c.label << ',' << csv_format(c.value) << ','
          << csv_format(c.tolerance) << ',' << (c.passed ? "pass" : "fail")
          << '\n';
    }
  }
  out.flush();
  if (!out) throw std::runtime_error("cannot write '" + summary_path + "'");

  summary.summary_path = summary_path;
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0)
          .count();
  return summary;
}

std::string list_scenarios() {
  std::ostringstream out;
  out << "built-in scenarios\n"
      << "\n"
      << "rotation      rigid rotation about the z axis on the unit ball, "
         "divergence-free: yes\n"
      << "              oracle: the core turns as a rigid body, so radii, set "
         "volumes and\n"
      << "              transported L2 norms are conserved exactly\n"
      << "\n"
      << "contraction   radial pull toward the origin on the unit ball, "
         "divergence-free: no\n"
      << "              oracle: in the core X(s,t,x) = x exp(t-s), the "
         "divergence is -3 and\n"
      << "              transported volumes scale by exp(3(t-s))\n"
      << "\n"
      << "rough_shear   shear along x1 with a sqrt-profile in x2 on the box "
         "(-1,1)^3, divergence-free: no\n"
      << "              oracle: x2 and x3 never move, the velocity gradient "
         "blows up at the\n"
      << "              x2 = 0 plane, and the divergence lives in the shell "
         "0.7 < |x1| < 0.9\n"
      << "\n"
      << "zero          frozen fluid on a configurable domain, "
         "divergence-free: yes\n"
      << "              oracle: X(s,t,x) = x exactly, so every identity "
         "degenerates to 0 = 0\n";
  return out.str();
}

std::string format_run_summary(const RunSummary& summary) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-18s %-6s %9s  %-26s %12s %12s\n",
                "suite", "status", "seconds", "worst check", "value",
                "tolerance");
  out << line;
  for (const SuiteResult& suite : summary.suites) {
    const CheckResult* worst = nullptr;
    for (const CheckResult& c : suite.checks) {
      if (!worst || (!c.passed && worst->passed) ||
          (c.passed == worst->passed &&
           c.value - c.tolerance > worst->value - worst->tolerance)) {
        worst = &c;
      }
    }
    std::snprintf(line, sizeof(line), "%-18s %-6s %9.2f  %-26s %12.3g %12.3g\n",
                  suite.suite.c_str(), suite.passed ? "pass" : "FAIL",
                  suite.wall_seconds, worst ? worst->label.c_str() : "-",
                  worst ? worst->value : 0.0, worst ? worst->tolerance : 0.0);
    out << line;
    for (const std::string& note : suite.notes) {
      out << "  note: " << note << '\n';
    }
  }
  std::snprintf(line, sizeof(line), "overall: %s (%.2f s)\n",
                summary.passed ? "pass" : "FAIL", summary.wall_seconds);
  out << line;
  return out.str();
}

}  // namespace flowlab
