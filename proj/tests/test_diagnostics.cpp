#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "porous/constitutive.hpp"
#include "porous/diagnostics.hpp"
#include "porous/mesh.hpp"
#include "porous/stepper.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

using namespace porous;

namespace {

std::shared_ptr<const Mesh> two_triangle_square() {
  return std::make_shared<Mesh>(parse_mesh_text("nodes 4 triangles 2 bedges 4\n"
                                                "0 0\n1 0\n1 1\n0 1\n"
                                                "0 1 2\n0 2 3\n"
                                                "0 1 N\n1 2 N\n2 3 N\n3 0 D\n",
                                                "twotri"));
}

CoefficientSet make_coeffs(const std::string& b, const std::string& rho = "0.7") {
  return make_coefficient_set({{"b", b},
                               {"a", "constant value=1"},
                               {"dw", "constant value=0.4"},
                               {"lambda", "constant value=1"},
                               {"b2", "5"},
                               {"rho", rho}});
}

Scenario base_scenario(std::shared_ptr<const Mesh> mesh, CoefficientSet cs, double tau,
                       double t_end) {
  Scenario sc;
  sc.mesh = std::move(mesh);
  sc.coeffs = std::move(cs);
  sc.tau = tau;
  sc.t_end = t_end;
  const int n = sc.mesh->node_count();
  sc.u0.assign(n, 0.0);
  sc.w0.assign(n, 0.0);
  sc.th0.assign(n, 0.0);
  return sc;
}

} // namespace

TEST_CASE("linf_overshoot measures the worst excursion past the bounds") {
  FieldBounds b{-1.0, 2.0};
  CHECK(linf_overshoot({-1.0, 0.0, 2.0}, b) == 0.0);
  CHECK(linf_overshoot({0.0, 2.5}, b) == 0.5);
  CHECK(linf_overshoot({-1.25, 0.0}, b) == 0.25);
  // Both sides violated: the larger excursion wins.
  CHECK(linf_overshoot({-1.25, 2.75}, b) == 0.75);
}

TEST_CASE("pure solute diffusion honors the discrete maximum principle") {
  // Moisture pinned at its boundary level means no convection at all, so the
  // solute equation is backward Euler diffusion on an M-matrix mesh: the
  // range of the initial bump must never widen beyond solver noise.
  auto mesh = std::make_shared<Mesh>(generate_rect_mesh(8, 8, 1.0, 1.0, {}));
  Scenario sc = base_scenario(mesh, make_coeffs("logistic lo=0.05 hi=0.4"), 0.02, 0.2);
  sc.g_u = -0.5;
  sc.u0.assign(mesh->node_count(), -0.5);
  sc.lin_tol = 1e-12;
  const double pi = 3.14159265358979324;
  for (int i = 0; i < mesh->node_count(); ++i)
    sc.w0[i] = std::sin(pi * mesh->nodes[i][0]) * std::sin(pi * mesh->nodes[i][1]);
  finalize_scenario(sc);
  CHECK(sc.bounds_w.lo == 0.0);
  CHECK(sc.bounds_w.hi == 1.0);

  RunSummary sum = run(sc);
  CHECK(sum.steps_completed == 10);
  CHECK(sum.max_overshoot_u == 0.0);
  CHECK(sum.max_overshoot_w <= 1e-11);
  // The bump really diffuses.
  double peak = 0.0;
  for (double v : sum.final_state.w) peak = std::max(peak, v);
  CHECK(peak < 0.9);
}

TEST_CASE("energy audit is identically zero on a steady state") {
  auto mesh = std::make_shared<Mesh>(generate_rect_mesh(4, 4, 1.0, 1.0, {}));
  Scenario sc = base_scenario(mesh, make_coeffs("logistic lo=0.05 hi=0.4"), 0.1, 1.0);
  sc.g_u = -0.5;
  sc.u0.assign(mesh->node_count(), -0.5);
  finalize_scenario(sc);

  RunSummary sum = run(sc, {}, true);
  EnergyAudit audit = energy_audit(sum.trajectory, sc);
  CHECK(audit.energy0 == 0.0);
  CHECK(audit.slack.size() == 10);
  for (double s : audit.slack) CHECK(std::fabs(s) <= 1e-14);
  CHECK(audit.pass);

  // A constant trajectory is also translation-invariant.
  for (int k = 1; k <= 3; ++k) {
    TranslateAudit ta = translate_audit(sum.trajectory, sc, k);
    CHECK(ta.u == 0.0);
    CHECK(ta.w == 0.0);
    CHECK(ta.th == 0.0);
  }
}

TEST_CASE("energy slack equals the squared-jump sum for a linear capacity") {
  // With b(z) = z + c the centered energy is (z-g)^2/2 (the offset cancels)
  // and testing the discrete moisture equation with v = u^n - g gives the
  // exact algebraic identity
  //   E_0 - E_n - sum tau u'Ku  =  1/2 sum ||u^m - u^{m-1}||^2_{M_L},
  // so the audit's slack is not merely nonnegative but pinned. The offset
  // keeps b(u) > 0 on u in [-1, 0], which the transport assembly requires.
  auto mesh = std::make_shared<Mesh>(generate_rect_mesh(4, 4, 1.0, 1.0, {}));
  CoefficientSet cs = make_coefficient_set({{"b", "linear offset=1.2 slope=1"},
                                            {"a", "vg amin=0.4 amax=1.2 alpha=0.35"},
                                            {"dw", "constant value=0.4"},
                                            {"lambda", "bounded lo=0.5 hi=1.5 ktheta=0.3"},
                                            {"b2", "5"},
                                            {"rho", "0.7"}});
  Scenario sc = base_scenario(mesh, cs, 0.05, 0.3);
  sc.g_u = -0.3;
  sc.newton_tol = 1e-13;
  sc.lin_tol = 1e-13;
  for (int i = 0; i < mesh->node_count(); ++i) sc.u0[i] = -1.0 + mesh->nodes[i][0];
  for (int i = 0; i < mesh->node_count(); ++i) sc.th0[i] = 0.2 * mesh->nodes[i][1];
  finalize_scenario(sc);

  RunSummary sum = run(sc, {}, true);
  EnergyAudit audit = energy_audit(sum.trajectory, sc);
  REQUIRE(audit.slack.size() == 6);

  const NodalField& m = sc.lumped_unit;
  double jump_sum = 0.0;
  double min_slack = audit.slack[0];
  for (size_t n = 1; n < sum.trajectory.size(); ++n) {
    double s = 0.0;
    for (int i = 0; i < mesh->node_count(); ++i) {
      double du = sum.trajectory[n].u[i] - sum.trajectory[n - 1].u[i];
      s += m[i] * du * du;
    }
    jump_sum += 0.5 * s;
    CHECK(audit.slack[n - 1] == doctest::Approx(jump_sum).scale(1.0).epsilon(1e-10));
    min_slack = std::min(min_slack, audit.slack[n - 1]);
  }
  CHECK(audit.pass);
  CHECK(audit.min_slack <= 0.0); // min_slack folds in the zero baseline
  CHECK(sum.min_energy_slack == doctest::Approx(min_slack).epsilon(1e-12));
  CHECK(sum.energy0 == doctest::Approx(audit.energy0).epsilon(1e-14));
}

TEST_CASE("translate audit reproduces a two-step hand computation") {
  auto mesh = two_triangle_square();
  // b(z) = 2z turns the u-term into 2 m du^2; masses are (1/3,1/6,1/3,1/6).
  Scenario sc = base_scenario(mesh, make_coeffs("linear offset=0 slope=2"), 0.1, 0.2);
  finalize_scenario(sc);

  auto state = [&](std::vector<double> u, std::vector<double> w, std::vector<double> th,
                   double t) {
    State s;
    s.t = t;
    s.u = std::move(u);
    s.w = std::move(w);
    s.theta = std::move(th);
    return s;
  };
  std::vector<State> traj = {
      state({0, 0, 0, 0}, {1, 0, 0, 1}, {0, 0, 0, 0}, 0.0),
      state({0.1, 0.2, -0.1, 0}, {0.5, 0.5, 0, 1}, {0, 0, 0.1, 0}, 0.1),
      state({0.3, 0.1, 0.2, -0.2}, {0, 1, 0, 1}, {0, 0, 0.3, 0}, 0.2),
  };

  // k = 2: single term n = 0.
  TranslateAudit t2 = translate_audit(traj, sc, 2);
  // u: 2 tau sum m du^2 with du = (0.3,0.1,0.2,-0.2)
  CHECK(t2.u == doctest::Approx(2.0 * 0.1 * (0.09 / 3 + 0.01 / 6 + 0.04 / 3 + 0.04 / 6))
                    .epsilon(1e-14));
  // w: dw = (-1,1,0,0)
  CHECK(t2.w == doctest::Approx(0.1 * (1.0 / 3 + 1.0 / 6)).epsilon(1e-14));
  // th: dth = (0,0,0.3,0)
  CHECK(t2.th == doctest::Approx(0.1 * (0.09 / 3)).epsilon(1e-14));

  // k = 1: two terms.
  TranslateAudit t1 = translate_audit(traj, sc, 1);
  double u_expected = 2.0 * 0.1 *
                      ((0.01 / 3 + 0.04 / 6 + 0.01 / 3 + 0.0) +
                       (0.04 / 3 + 0.01 / 6 + 0.09 / 3 + 0.04 / 6));
  CHECK(t1.u == doctest::Approx(u_expected).epsilon(1e-14));
  double w_expected = 0.1 * ((0.25 / 3 + 0.25 / 6) + (0.25 / 3 + 0.25 / 6));
  CHECK(t1.w == doctest::Approx(w_expected).epsilon(1e-14));
  double th_expected = 0.1 * (0.01 / 3 + 0.04 / 3);
  CHECK(t1.th == doctest::Approx(th_expected).epsilon(1e-14));

  // The symmetric convention makes the sums exactly reversal-invariant.
  std::vector<State> rev(traj.rbegin(), traj.rend());
  for (int k = 1; k <= 2; ++k) {
    TranslateAudit fwd = translate_audit(traj, sc, k);
    TranslateAudit bwd = translate_audit(rev, sc, k);
    CHECK(fwd.u == bwd.u);
    CHECK(fwd.w == bwd.w);
    CHECK(fwd.th == bwd.th);
  }

  // Range checking on k.
  CHECK_THROWS_WITH_AS(translate_audit(traj, sc, 0), doctest::Contains("out of range"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(translate_audit(traj, sc, 3), doctest::Contains("[1, 2]"),
                       std::invalid_argument);
  std::vector<State> single = {traj[0]};
  CHECK_THROWS_WITH_AS(translate_audit(single, sc, 1), doctest::Contains("no steps"),
                       std::invalid_argument);
}

TEST_CASE("mass audit integrates the three conserved densities") {
  auto mesh = two_triangle_square();
  CoefficientSet cs = make_coeffs("constant value=0.3", "0.5");

  State s;
  s.u = {-2.0, 1.0, 0.0, 3.0}; // irrelevant for a constant b
  s.w = {2.0, 2.0, 2.0, 2.0};
  s.theta = {1.0, 1.0, 1.0, 1.0};
  auto mass = mass_audit(s, cs, *mesh);
  CHECK(mass[0] == doctest::Approx(0.3).epsilon(1e-14)); // 0.3 * area
  CHECK(mass[1] == doctest::Approx(0.6).epsilon(1e-14)); // b w
  CHECK(mass[2] == doctest::Approx(0.8).epsilon(1e-14)); // (b + rho) theta

  // Linear in w: doubling the solute doubles only the second density.
  for (double& v : s.w) v *= 2.0;
  auto mass2 = mass_audit(s, cs, *mesh);
  CHECK(mass2[0] == doctest::Approx(mass[0]).epsilon(1e-15));
  CHECK(mass2[1] == doctest::Approx(2.0 * mass[1]).epsilon(1e-14));
  CHECK(mass2[2] == doctest::Approx(mass[2]).epsilon(1e-15));
}

TEST_CASE("diagnostics rows carry exact values for a hand-checkable state") {
  auto mesh = two_triangle_square();
  Scenario sc = base_scenario(mesh, make_coeffs("linear offset=0 slope=1"), 0.1, 0.1);
  sc.g_u = 0.0;
  finalize_scenario(sc);
  sc.bounds_u = {0.0, 1.0};
  sc.bounds_w = {0.0, 1.0};
  sc.bounds_th = {0.0, 1.0};

  State s;
  s.t = 0.37;
  s.u = {0.0, 1.0, 1.0, 0.0};    // the function x at the nodes
  s.w = {0.0, 2.0, 2.0, 0.0};    // 2x
  s.theta = {0.7, 0.7, 0.7, 0.7};

  DiagnosticsRow row = make_diagnostics_row(3, s, sc, 1.5, 4, 5, 6, 7);
  CHECK(row.step == 3);
  CHECK(row.t == 0.37);
  CHECK(row.min_u == 0.0);
  CHECK(row.max_u == 1.0);
  CHECK(row.min_w == 0.0);
  CHECK(row.max_w == 2.0);
  CHECK(row.min_th == 0.7);
  CHECK(row.max_th == 0.7);

  // grad x has unit L2 norm on the unit square; the norms are not squared.
  CHECK(row.grad_u_l2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(row.grad_w_l2 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(row.grad_th_l2 == doctest::Approx(0.0).scale(1).epsilon(1e-13));

  // Lumped quadrature is exact for nodal data: int x = 1/2 on the square.
  CHECK(row.mass_b == doctest::Approx(0.5).epsilon(1e-14));
  // int x * 2x under lumped quadrature: sum m x 2x = 2(1/6 + 1/3) = 1.
  CHECK(row.mass_bw == doctest::Approx(1.0).epsilon(1e-14));
  // int (x + 0.7) * 0.7 lumped = 0.7 * (0.5 + 0.7).
  CHECK(row.mass_bth == doctest::Approx(0.7 * 1.2).epsilon(1e-14));

  // Energy with g = 0 and b(z) = z: sum m u^2/2 = (1/6 + 1/3)/2.
  CHECK(row.energy_B == doctest::Approx(0.25).epsilon(1e-14));

  CHECK(row.dissipation_cum == 1.5);
  CHECK(row.overshoot_u == 0.0);
  CHECK(row.overshoot_w == 1.0); // max_w = 2 vs bound 1
  CHECK(row.overshoot_th == 0.0);
  CHECK(row.newton_iters == 4);
  CHECK(row.lin_iters_u == 5);
  CHECK(row.lin_iters_w == 6);
  CHECK(row.lin_iters_th == 7);
}

TEST_CASE("dissipation accumulates monotonically along a run") {
  auto mesh = std::make_shared<Mesh>(generate_rect_mesh(4, 4, 1.0, 1.0, {}));
  Scenario sc = base_scenario(mesh, make_coeffs("logistic lo=0.05 hi=0.4"), 0.05, 0.5);
  sc.g_u = -0.5;
  for (int i = 0; i < mesh->node_count(); ++i) sc.u0[i] = -2.0 + 1.2 * mesh->nodes[i][0];
  finalize_scenario(sc);

  std::vector<DiagnosticsRow> rows;
  RunCallbacks cb;
  cb.on_row = [&](const DiagnosticsRow& r) { rows.push_back(r); };
  RunSummary sum = run(sc, cb);
  REQUIRE(rows.size() == 11); // bookkeeping row + 10 steps

  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].step == static_cast<int>(i));
    CHECK(rows[i].t == doctest::Approx(0.05 * static_cast<double>(i)).epsilon(1e-12));
    if (i > 0) CHECK(rows[i].dissipation_cum >= rows[i - 1].dissipation_cum);
  }
  CHECK(rows[0].dissipation_cum == 0.0);
  CHECK(rows.back().dissipation_cum > 0.0); // the front actually moves
  CHECK(sum.steps_completed == 10);
}
