#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flowlab/config.hpp"
#include "flowlab/fields.hpp"
#include "flowlab/flow.hpp"
#include "flowlab/geometry.hpp"
#include "flowlab/reynolds.hpp"
#include "flowlab/runner.hpp"
#include "flowlab/transport.hpp"

namespace py = pybind11;
using namespace flowlab;

PYBIND11_MODULE(_core, m) {
  m.doc() = "flow laboratory core";

  // ---- geometry ----------------------------------------------------------

  py::class_<Vec3>(m, "Vec3")
      .def(py::init([](double x, double y, double z) { return Vec3{x, y, z}; }),
           py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("z") = 0.0)
      .def_readwrite("x", &Vec3::x)
      .def_readwrite("y", &Vec3::y)
      .def_readwrite("z", &Vec3::z)
      .def("norm", &Vec3::norm)
      .def("norm2", &Vec3::norm2)
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(py::self * double())
      .def(double() * py::self)
      .def("__repr__", [](const Vec3& v) {
        return "Vec3(" + std::to_string(v.x) + ", " + std::to_string(v.y) +
               ", " + std::to_string(v.z) + ")";
      });

  py::class_<Domain> domain(m, "Domain");
  py::enum_<Domain::Kind>(domain, "Kind")
      .value("Ball", Domain::Kind::Ball)
      .value("Box", Domain::Kind::Box);
  domain
      .def_static("ball", &Domain::ball, py::arg("center"), py::arg("radius"))
      .def_static("box", &Domain::box, py::arg("center"), py::arg("halfwidths"))
      .def_readonly("kind", &Domain::kind)
      .def_readonly("center", &Domain::center)
      .def_readonly("radius", &Domain::radius)
      .def_readonly("halfwidths", &Domain::halfwidths)
      .def_readonly("exact_volume", &Domain::exact_volume)
      .def("circumscribed_radius", &Domain::circumscribed_radius);

  m.def("contains", &contains, py::arg("domain"), py::arg("x"));
  m.def("distance_to", &distance_to, py::arg("domain"), py::arg("x"));

  py::class_<Enclosure>(m, "Enclosure")
      .def_readonly("domain", &Enclosure::domain)
      .def_readonly("ball_center", &Enclosure::ball_center)
      .def_readonly("ball_radius", &Enclosure::ball_radius)
      .def_readonly("eps_max", &Enclosure::eps_max)
      .def("margin", &Enclosure::margin)
      .def("as_ball_domain", &Enclosure::as_ball_domain);

  m.def("make_enclosure", &make_enclosure, py::arg("domain"),
        py::arg("eps_max"));

  py::class_<MeasurableSet>(m, "MeasurableSet")
      .def_static("ball", &MeasurableSet::ball, py::arg("label"),
                  py::arg("center"), py::arg("radius"))
      .def_static("box", &MeasurableSet::box, py::arg("label"),
                  py::arg("center"), py::arg("halfwidths"))
      .def_readonly("label", &MeasurableSet::label)
      .def_readonly("exact_volume", &MeasurableSet::exact_volume)
      .def("contains",
           [](const MeasurableSet& s, const Vec3& x) { return s.indicator(x); },
           py::arg("x"));

  py::class_<MeasureEstimate>(m, "MeasureEstimate")
      .def_readonly("value", &MeasureEstimate::value)
      .def_readonly("std_error", &MeasureEstimate::std_error)
      .def_readonly("samples", &MeasureEstimate::samples)
      .def_readonly("seed", &MeasureEstimate::seed);

  m.def("sample_uniform",
        [](const Domain& region, std::uint64_t n, std::uint64_t seed) {
          return sample_uniform(region, n, seed);
        },
        py::arg("region"), py::arg("n"), py::arg("seed"));
  m.def("estimate_measure", &estimate_measure, py::arg("set"),
        py::arg("region"), py::arg("n"), py::arg("seed"));

  // ---- fields --------------------------------------------------------------

  py::class_<VelocityField>(m, "VelocityField")
      .def_readonly("name", &VelocityField::name)
      .def_readonly("domain", &VelocityField::domain)
      .def_readonly("div_sup_bound", &VelocityField::div_sup_bound)
      .def_readonly("sup_speed_bound", &VelocityField::sup_speed_bound)
      .def_readonly("divergence_free", &VelocityField::divergence_free)
      .def_readonly("regularity_note", &VelocityField::regularity_note)
      .def("velocity",
           [](const VelocityField& f, double t, const Vec3& x) {
             return f.velocity(t, x);
           },
           py::arg("t"), py::arg("x"))
      .def("divergence",
           [](const VelocityField& f, double t, const Vec3& x) {
             return f.divergence(t, x);
           },
           py::arg("t"), py::arg("x"));

  m.def("rotation_field", &rotation_field);
  m.def("contraction_field", &contraction_field);
  m.def("rough_shear_field", &rough_shear_field);
  m.def("zero_field", &zero_field, py::arg("domain"));
  m.def("mollified_field",
        [](const VelocityField& f, const Enclosure& enc, double eps,
           int order) { return mollify(f, enc, eps, order).as_field(); },
        py::arg("field"), py::arg("enclosure"), py::arg("eps"),
        py::arg("order") = 12);
  m.def("compressibility_constant", &compressibility_constant,
        py::arg("field"), py::arg("s"), py::arg("t"));

  // ---- flow ----------------------------------------------------------------

  py::register_exception<TrajectoryEscape>(m, "TrajectoryEscape");

  py::class_<FlowEvaluator>(m, "FlowEvaluator")
      .def_readonly("field", &FlowEvaluator::field)
      .def_readonly("enclosure", &FlowEvaluator::enclosure)
      .def_readonly("step_size", &FlowEvaluator::step_size);

  m.def("make_flow", &make_flow, py::arg("field"), py::arg("enclosure"),
        py::arg("step_size"));

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("times", &TrajectoryRecord::times)
      .def_readonly("positions", &TrajectoryRecord::positions)
      .def_readonly("jacobian_log", &TrajectoryRecord::jacobian_log)
      .def("endpoint", &TrajectoryRecord::endpoint)
      .def("jacobian_log_end", &TrajectoryRecord::jacobian_log_end);

  py::class_<FlowPoint>(m, "FlowPoint")
      .def_readonly("position", &FlowPoint::position)
      .def_readonly("jacobian_log", &FlowPoint::jacobian_log);

  py::class_<DefectStats>(m, "DefectStats")
      .def_readonly("max", &DefectStats::max)
      .def_readonly("mean", &DefectStats::mean)
      .def_readonly("count", &DefectStats::count);

  m.def("advect", &advect, py::arg("flow"), py::arg("t"), py::arg("x0"),
        py::arg("s"));
  m.def("advect_endpoint", &advect_endpoint, py::arg("flow"), py::arg("t"),
        py::arg("x0"), py::arg("s"));
  m.def("flow_endpoint", &flow_endpoint, py::arg("flow"), py::arg("t"),
        py::arg("x0"), py::arg("s"));
  m.def("flow_map", &flow_map, py::arg("flow"), py::arg("s"), py::arg("t"),
        py::arg("points"));
  m.def("group_defect", &group_defect, py::arg("flow"), py::arg("s"),
        py::arg("t"), py::arg("points"));
  m.def("semigroup_defect", &semigroup_defect, py::arg("flow"), py::arg("s"),
        py::arg("tau"), py::arg("t"), py::arg("points"));
  m.def("leak_measure", &leak_measure, py::arg("flow"), py::arg("s"),
        py::arg("t"), py::arg("set"), py::arg("n"), py::arg("seed"));
  m.def("write_trajectory_csv", &write_trajectory_csv, py::arg("record"),
        py::arg("path"));

  // ---- transport -----------------------------------------------------------

  py::class_<InitialDatum>(m, "InitialDatum")
      .def_readonly("label", &InitialDatum::label)
      .def_readonly("sup_bound", &InitialDatum::sup_bound)
      .def("__call__",
           [](const InitialDatum& d, const Vec3& x) { return d.evaluate(x); },
           py::arg("x"));

  m.def("coordinate_datum", &coordinate_datum, py::arg("axis"),
        py::arg("sup_bound"));
  m.def("smooth_bump_datum", &smooth_bump_datum, py::arg("center"),
        py::arg("radius"), py::arg("amplitude"));
  m.def("mollified_indicator_datum", &mollified_indicator_datum,
        py::arg("center"), py::arg("radius"), py::arg("delta"));

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init([](const Domain& box, int cells,
                       std::optional<double> dt) {
             GridSpec s;
             s.box = box;
             s.cells = cells;
             s.dt = dt;
             return s;
           }),
           py::arg("box"), py::arg("cells") = 64,
           py::arg("dt") = std::nullopt)
      .def_readwrite("box", &GridSpec::box)
      .def_readwrite("cells", &GridSpec::cells)
      .def_readwrite("dt", &GridSpec::dt);

  py::class_<GridFunction>(m, "GridFunction")
      .def_readonly("box", &GridFunction::box)
      .def_readonly("cells", &GridFunction::cells)
      .def_readonly("values", &GridFunction::values)
      .def("at",
           [](const GridFunction& g, int i, int j, int k) {
             return g.at(i, j, k);
           },
           py::arg("i"), py::arg("j"), py::arg("k"))
      .def("cell_center", &GridFunction::cell_center, py::arg("i"),
           py::arg("j"), py::arg("k"))
      .def("cell_volume", &GridFunction::cell_volume)
      .def("l1_norm", &GridFunction::l1_norm)
      .def("l2_norm", &GridFunction::l2_norm);

  m.def("solve_eulerian", &solve_eulerian, py::arg("field"), py::arg("rho0"),
        py::arg("s"), py::arg("t"), py::arg("spec"));
  m.def("solve_lagrangian", &solve_lagrangian, py::arg("flow"),
        py::arg("rho0"), py::arg("s"), py::arg("t"), py::arg("points"));

  py::class_<NormEvolutionReport>(m, "NormEvolutionReport")
      .def_readonly("t", &NormEvolutionReport::t)
      .def_readonly("lhs", &NormEvolutionReport::lhs)
      .def_readonly("rhs", &NormEvolutionReport::rhs)
      .def_readonly("residual", &NormEvolutionReport::residual)
      .def_readonly("mc_sigma", &NormEvolutionReport::mc_sigma);

  m.def("l2_identity_residual", &l2_identity_residual, py::arg("flow"),
        py::arg("rho0"), py::arg("s"), py::arg("times"), py::arg("n"),
        py::arg("seed"), py::arg("nodes_per_unit_time") = 16);

  m.def("commutator_field",
        [](const VelocityField& field,
           const std::function<double(const Vec3&)>& rho, double eps, double t,
           const GridSpec& spec, const Enclosure& enclosure, int order) {
          return commutator_field(field, rho, eps, t, spec, enclosure, order);
        },
        py::arg("field"), py::arg("rho"), py::arg("eps"), py::arg("t"),
        py::arg("spec"), py::arg("enclosure"), py::arg("order") = 12);

  m.def("rho_convergence_study", &rho_convergence_study, py::arg("field"),
        py::arg("rho0"), py::arg("s"), py::arg("t"), py::arg("eps_list"),
        py::arg("n"), py::arg("seed"), py::arg("enclosure"),
        py::arg("step_size"), py::arg("order") = 10);

  // ---- transport identities -------------------------------------------------

  py::class_<ReynoldsReport>(m, "ReynoldsReport")
      .def_readonly("identity_tag", &ReynoldsReport::identity_tag)
      .def_readonly("s", &ReynoldsReport::s)
      .def_readonly("t", &ReynoldsReport::t)
      .def_readonly("lhs", &ReynoldsReport::lhs)
      .def_readonly("rhs", &ReynoldsReport::rhs)
      .def_readonly("residual", &ReynoldsReport::residual)
      .def_readonly("mc_sigma", &ReynoldsReport::mc_sigma)
      .def_readonly("quad_tol", &ReynoldsReport::quad_tol)
      .def_readonly("time_quadrature_nodes",
                    &ReynoldsReport::time_quadrature_nodes)
      .def_readonly("seed", &ReynoldsReport::seed);

  py::class_<DensityFunction>(m, "DensityFunction")
      .def(py::init([](std::function<double(double, const Vec3&)> g,
                       std::function<double(double, const Vec3&)> dg_dt,
                       std::function<Vec3(double, const Vec3&)> grad_g) {
             DensityFunction d;
             d.g = std::move(g);
             d.dg_dt = std::move(dg_dt);
             d.grad_g = std::move(grad_g);
             return d;
           }),
           py::arg("g"), py::arg("dg_dt"), py::arg("grad_g"));

  m.def("constant_density", &constant_density, py::arg("value"));
  m.def("density_derivative_defect", &density_derivative_defect, py::arg("g"),
        py::arg("region"), py::arg("t_lo"), py::arg("t_hi"), py::arg("probes"),
        py::arg("seed"));

  py::enum_<MeasureVariant>(m, "MeasureVariant")
      .value("trans1", MeasureVariant::trans1)
      .value("trans0", MeasureVariant::trans0);
  py::enum_<DensityVariant>(m, "DensityVariant")
      .value("trans2", DensityVariant::trans2)
      .value("trans3", DensityVariant::trans3);

  m.def("measure_preimage", &measure_preimage, py::arg("flow"), py::arg("s"),
        py::arg("t"), py::arg("set"), py::arg("n"), py::arg("seed"));
  m.def("measure_image", &measure_image, py::arg("flow"), py::arg("s"),
        py::arg("t"), py::arg("set"), py::arg("n"), py::arg("seed"));
  m.def("measure_image_jacobian", &measure_image_jacobian, py::arg("flow"),
        py::arg("s"), py::arg("t"), py::arg("set"), py::arg("n"),
        py::arg("seed"));
  m.def("rtt_measure_residual", &rtt_measure_residual, py::arg("flow"),
        py::arg("s"), py::arg("t"), py::arg("set"), py::arg("time_nodes"),
        py::arg("n"), py::arg("seed"), py::arg("variant"));
  m.def("rtt_density_residual", &rtt_density_residual, py::arg("flow"),
        py::arg("g"), py::arg("s"), py::arg("t"), py::arg("set"),
        py::arg("time_nodes"), py::arg("n"), py::arg("seed"),
        py::arg("variant"));
  m.def("classical_density_residual", &classical_density_residual,
        py::arg("flow"), py::arg("g"), py::arg("s"), py::arg("t"),
        py::arg("set"), py::arg("time_nodes"), py::arg("n"), py::arg("seed"));
  m.def("classical_measure_residual", &classical_measure_residual,
        py::arg("flow"), py::arg("s"), py::arg("t"), py::arg("set"),
        py::arg("time_nodes"), py::arg("n"), py::arg("seed"));
  m.def("change_of_variables_check",
        [](const FlowEvaluator& flow,
           const std::function<double(const Vec3&)>& f, double s, double t,
           int time_nodes, std::uint64_t n, std::uint64_t seed) {
          return change_of_variables_check(flow, f, s, t, time_nodes, n, seed);
        },
        py::arg("flow"), py::arg("f"), py::arg("s"), py::arg("t"),
        py::arg("time_nodes"), py::arg("n"), py::arg("seed"));

  py::class_<LimitStudyRow>(m, "LimitStudyRow")
      .def_readonly("eps", &LimitStudyRow::eps)
      .def_readonly("preimage", &LimitStudyRow::preimage)
      .def_readonly("image", &LimitStudyRow::image)
      .def_readonly("image_jacobian", &LimitStudyRow::image_jacobian)
      .def_readonly("preimage_difference", &LimitStudyRow::preimage_difference)
      .def_readonly("image_difference", &LimitStudyRow::image_difference)
      .def_readonly("jacobian_difference", &LimitStudyRow::jacobian_difference);

  m.def("rtt_limit_study", &rtt_limit_study, py::arg("base_field"),
        py::arg("eps_list"), py::arg("s"), py::arg("t"), py::arg("set"),
        py::arg("enclosure"), py::arg("step_size"), py::arg("n"),
        py::arg("seed"), py::arg("order") = 12);

  py::class_<ContainmentReport>(m, "ContainmentReport")
      .def_readonly("checked", &ContainmentReport::checked)
      .def_readonly("violations", &ContainmentReport::violations)
      .def_readonly("delta", &ContainmentReport::delta)
      .def_readonly("worst_defect", &ContainmentReport::worst_defect);

  m.def("containment_check", &containment_check, py::arg("flow"), py::arg("s"),
        py::arg("t"), py::arg("set"), py::arg("n"), py::arg("seed"));

  py::class_<SandwichReport>(m, "SandwichReport")
      .def_readonly("estimate", &SandwichReport::estimate)
      .def_readonly("sigma", &SandwichReport::sigma)
      .def_readonly("set_measure", &SandwichReport::set_measure)
      .def_readonly("c", &SandwichReport::c)
      .def_readonly("lower", &SandwichReport::lower)
      .def_readonly("upper", &SandwichReport::upper)
      .def_readonly("inside", &SandwichReport::inside);

  m.def("compressibility_sandwich", &compressibility_sandwich, py::arg("flow"),
        py::arg("s"), py::arg("t"), py::arg("set"), py::arg("n"),
        py::arg("seed"));

  m.def("write_reynolds_csv", &write_reynolds_csv, py::arg("reports"),
        py::arg("path"));
  m.def("format_reynolds_table", &format_reynolds_table, py::arg("reports"));

  // ---- config and runner -----------------------------------------------------

  py::class_<SetSpec>(m, "SetSpec")
      .def_readonly("label", &SetSpec::label)
      .def_readonly("kind", &SetSpec::kind)
      .def_readonly("center", &SetSpec::center)
      .def_readonly("radius", &SetSpec::radius)
      .def_readonly("halfwidths", &SetSpec::halfwidths)
      .def("build", &SetSpec::build);

  py::class_<TimePair>(m, "TimePair")
      .def_readonly("s", &TimePair::s)
      .def_readonly("t", &TimePair::t);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readwrite("field_name", &ScenarioConfig::field_name)
      .def_readwrite("suites", &ScenarioConfig::suites)
      .def_readwrite("step_size", &ScenarioConfig::step_size)
      .def_readwrite("samples", &ScenarioConfig::samples)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("eps_max", &ScenarioConfig::eps_max)
      .def_readwrite("eps_list", &ScenarioConfig::eps_list)
      .def_readwrite("time_nodes", &ScenarioConfig::time_nodes)
      .def_readwrite("grid_cells", &ScenarioConfig::grid_cells)
      .def_readwrite("convergence_samples", &ScenarioConfig::convergence_samples)
      .def_readwrite("convergence_step", &ScenarioConfig::convergence_step)
      .def_readwrite("mollifier_order", &ScenarioConfig::mollifier_order)
      .def_readwrite("out_dir", &ScenarioConfig::out_dir)
      .def_readonly("time_pairs", &ScenarioConfig::time_pairs)
      .def_readonly("sets", &ScenarioConfig::sets)
      .def("build_field", &ScenarioConfig::build_field)
      .def("build_enclosure", &ScenarioConfig::build_enclosure);

  py::class_<ConfigError>(m, "ConfigError")
      .def_readonly("line", &ConfigError::line)
      .def_readonly("section", &ConfigError::section)
      .def_readonly("message", &ConfigError::message)
      .def("format", &ConfigError::format);

  py::class_<ParseResult>(m, "ParseResult")
      .def_readonly("config", &ParseResult::config)
      .def_readonly("errors", &ParseResult::errors)
      .def("ok", &ParseResult::ok);

  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("parse_config_file", &parse_config_file, py::arg("path"));
  m.def("known_suites", &known_suites);

  py::class_<CheckResult>(m, "CheckResult")
      .def_readonly("label", &CheckResult::label)
      .def_readonly("value", &CheckResult::value)
      .def_readonly("tolerance", &CheckResult::tolerance)
      .def_readonly("passed", &CheckResult::passed);

  py::class_<SuiteResult>(m, "SuiteResult")
      .def_readonly("suite", &SuiteResult::suite)
      .def_readonly("csv_path", &SuiteResult::csv_path)
      .def_readonly("passed", &SuiteResult::passed)
      .def_readonly("checks", &SuiteResult::checks)
      .def_readonly("notes", &SuiteResult::notes)
      .def_readonly("wall_seconds", &SuiteResult::wall_seconds);

  py::class_<RunSummary>(m, "RunSummary")
      .def_readonly("passed", &RunSummary::passed)
      .def_readonly("suites", &RunSummary::suites)
      .def_readonly("summary_path", &RunSummary::summary_path)
      .def_readonly("wall_seconds", &RunSummary::wall_seconds);

  m.def("run", &run, py::arg("config"));
  m.def("list_scenarios", &list_scenarios);
  m.def("format_run_summary", &format_run_summary, py::arg("summary"));
}
