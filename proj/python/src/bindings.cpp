// Python bindings for the transport solver. The surface mirrors the CLI:
// load a scenario from a config file, run it, inspect the audit summary,
// plus direct access to coefficient evaluation, validation, the dense
// oracle cross-check and manufactured-solution errors.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "porous/cli.hpp"
#include "porous/config.hpp"
#include "porous/constitutive.hpp"
#include "porous/mesh.hpp"
#include "porous/stepper.hpp"
#include "porous/verify.hpp"

#include <map>
#include <string>

namespace py = pybind11;
using namespace porous;

namespace {

EdgeMarker marker_from_char(char c) {
  if (c == 'D' || c == 'd') return EdgeMarker::Dirichlet;
  if (c == 'N' || c == 'n') return EdgeMarker::Neumann;
  throw std::invalid_argument("edge marker must be 'D' or 'N'");
}

Mesh make_rect_mesh(int nx, int ny, double lx, double ly, const std::string& markers) {
  if (markers.size() != 4)
    throw std::invalid_argument("markers must have 4 characters (left, right, bottom, top)");
  SideMarkers mk;
  mk.left = marker_from_char(markers[0]);
  mk.right = marker_from_char(markers[1]);
  mk.bottom = marker_from_char(markers[2]);
  mk.top = marker_from_char(markers[3]);
  return generate_rect_mesh(nx, ny, lx, ly, mk);
}

Scenario scenario_from_config(const std::string& path) {
  return cli::build_scenario(parse_config(path));
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "P1 finite-element solver for coupled moisture, solute and heat transport";

  py::register_exception<ConfigError>(m, "ConfigError");

  py::class_<ScalarCoeff>(m, "Coefficient",
                          "Scalar coefficient function parsed from a family spec string")
      .def(py::init([](const std::string& spec) { return ScalarCoeff::parse(spec, "coefficient"); }),
           py::arg("spec"))
      .def("__call__", &ScalarCoeff::eval, py::arg("z"))
      .def("deriv", &ScalarCoeff::deriv, py::arg("z"))
      .def("integral", &ScalarCoeff::integral, py::arg("from_z"), py::arg("to_z"))
      .def_property_readonly("spec", &ScalarCoeff::spec)
      .def("__repr__",
           [](const ScalarCoeff& c) { return "Coefficient('" + c.spec() + "')"; });

  py::class_<CoefficientSet>(m, "CoefficientSet",
                             "The coefficient functions b, a, D_w, lambda with b2 and rho")
      .def("b", &CoefficientSet::eval_b, py::arg("z"))
      .def("b_prime", &CoefficientSet::eval_b_prime, py::arg("z"))
      .def("a", &CoefficientSet::eval_a, py::arg("z"))
      .def("dw", &CoefficientSet::eval_dw, py::arg("z"))
      .def("lam", &CoefficientSet::eval_lambda, py::arg("theta"), py::arg("u"))
      .def("B", &CoefficientSet::eval_B, py::arg("z"),
           "Energy density B(z) = int_0^z (b(z) - b(s)) ds")
      .def("B_centered", &CoefficientSet::eval_B_centered, py::arg("z"), py::arg("g"))
      .def_readonly("b2", &CoefficientSet::b2)
      .def_readonly("rho", &CoefficientSet::rho);

  m.def(
      "make_coefficients",
      [](const std::map<std::string, std::string>& section) {
        return make_coefficient_set(section);
      },
      py::arg("section"),
      "Build a coefficient set from a dict with keys b, a, dw, lambda, b2, rho");

  py::class_<ValidationClause>(m, "ValidationClause")
      .def_readonly("name", &ValidationClause::name)
      .def_readonly("passed", &ValidationClause::pass)
      .def_readonly("detail", &ValidationClause::detail)
      .def("__repr__", [](const ValidationClause& c) {
        return std::string(c.pass ? "PASS " : "FAIL ") + c.name;
      });

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("clauses", &ValidationReport::clauses)
      .def_readonly("passed", &ValidationReport::pass);

  m.def("validate", &validate_assumptions, py::arg("coefficients"), py::arg("lo") = -50.0,
        py::arg("hi") = 50.0, py::arg("samples") = 10000,
        "Check the structural assumptions on a probe interval");

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("node_count", &Mesh::node_count)
      .def_property_readonly("triangle_count", &Mesh::triangle_count)
      .def_readonly("nodes", &Mesh::nodes)
      .def_readonly("triangles", &Mesh::triangles)
      .def_readonly("dirichlet_nodes", &Mesh::dirichlet_nodes)
      .def("__repr__", [](const Mesh& mesh) {
        return "Mesh(" + std::to_string(mesh.node_count()) + " nodes, " +
               std::to_string(mesh.triangle_count()) + " triangles)";
      });

  m.def("load_mesh", &read_mesh, py::arg("path"));
  m.def("rect_mesh", &make_rect_mesh, py::arg("nx"), py::arg("ny"), py::arg("lx") = 1.0,
        py::arg("ly") = 1.0, py::arg("markers") = "DNNN",
        "Structured triangulation of [0,lx] x [0,ly]; markers order is left, right, bottom, top");

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("tau", &Scenario::tau)
      .def_readonly("t_end", &Scenario::t_end)
      .def_readonly("steps", &Scenario::steps)
      .def_property_readonly("node_count",
                             [](const Scenario& sc) { return sc.mesh->node_count(); })
      .def("__repr__", [](const Scenario& sc) {
        return "Scenario(" + std::to_string(sc.mesh->node_count()) + " nodes, " +
               std::to_string(sc.steps) + " steps of " + std::to_string(sc.tau) + ")";
      });

  m.def("load_scenario", &scenario_from_config, py::arg("path"),
        "Parse a config file and build the finalized scenario it describes");

  py::class_<RunSummary>(m, "RunSummary")
      .def_readonly("steps_completed", &RunSummary::steps_completed)
      .def_readonly("wall_seconds", &RunSummary::wall_seconds)
      .def_readonly("max_overshoot_u", &RunSummary::max_overshoot_u)
      .def_readonly("max_overshoot_w", &RunSummary::max_overshoot_w)
      .def_readonly("max_overshoot_th", &RunSummary::max_overshoot_th)
      .def_readonly("energy_applicable", &RunSummary::energy_applicable)
      .def_readonly("energy0", &RunSummary::energy0)
      .def_readonly("min_energy_slack", &RunSummary::min_energy_slack)
      .def_readonly("conservation_applicable", &RunSummary::conservation_applicable)
      .def_readonly("max_drift_b", &RunSummary::max_drift_b)
      .def_readonly("max_drift_bw", &RunSummary::max_drift_bw)
      .def_readonly("max_drift_bth", &RunSummary::max_drift_bth)
      .def_property_readonly("t_final", [](const RunSummary& s) { return s.final_state.t; })
      .def_property_readonly("u", [](const RunSummary& s) { return s.final_state.u; })
      .def_property_readonly("w", [](const RunSummary& s) { return s.final_state.w; })
      .def_property_readonly("theta", [](const RunSummary& s) { return s.final_state.theta; });

  m.def(
      "run",
      [](const Scenario& sc, bool keep_trajectory) {
        return run(sc, RunCallbacks{}, keep_trajectory);
      },
      py::arg("scenario"), py::arg("keep_trajectory") = false,
      py::call_guard<py::gil_scoped_release>(),
      "Advance the scenario from 0 to t_end and return the audit summary");

  m.def("oracle_deviation", &oracle_step_check, py::arg("scenario"),
        py::call_guard<py::gil_scoped_release>(),
        "Max nodal deviation of one advance against the dense oracle (<= 12 nodes)");

  m.def(
      "mms_error",
      [](const std::string& case_id, const CoefficientSet& cs, int n, double tau, double t_end) {
        ManufacturedCase mc = build_mms_case(case_id, cs);
        MmsErrors e = run_mms_error(mc, n, tau, t_end);
        return py::make_tuple(e.u, e.w, e.th);
      },
      py::arg("case_id"), py::arg("coefficients"), py::arg("n"), py::arg("tau"),
      py::arg("t_end"), "L2 space-time errors against a manufactured solution");

  m.def("mms_cases", &mms_catalog_ids, "Identifiers of the manufactured cases");
}
