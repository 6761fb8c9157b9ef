#pragma once

#include "porous/constitutive.hpp"
#include "porous/stepper.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace porous {

struct VerifyError : std::runtime_error {
  explicit VerifyError(const std::string& what) : std::runtime_error(what) {}
};

/// Closed-form space-time scalar field with the derivatives the source
/// construction needs.
struct Field3 {
  std::function<double(double, double, double)> val, dx, dy, dt, dxx, dyy;
};

/// Manufactured solution triple with analytically derived sources such that
/// (u*, w*, th*) solves the strong system with those sources on the right.
struct ManufacturedCase {
  std::string id;
  Field3 u, w, th;
  CoefficientSet cs;
  SpaceTimeFn f_u, f_w, f_th;
};

std::vector<std::string> mms_catalog_ids();

/// Known ids: "constant", "steady_linear", "poly_spacetime", "separable_sin".
ManufacturedCase build_mms_case(const std::string& id, const CoefficientSet& cs);

/// Max |analytic source - nested-centered-difference source| over `samples`
/// random space-time points in (0,1)^2 x (0.1 t_end, 0.9 t_end); uses only
/// the .val members, so it is an independent check of the hand-coded
/// derivatives and chain rule.
double mms_fd_residual_max(const ManufacturedCase& mc, int samples, unsigned seed, double t_end,
                           double fd_step = 1e-4);

/// Unit-square all-Dirichlet scenario driven by the manufactured case
/// (exact boundary and initial data, analytic sources, tight solver
/// tolerances). The mesh is nxy x nxy.
Scenario make_mms_scenario(const ManufacturedCase& mc, int nxy, double tau, double t_end);

/// L2(Q_T) errors of a finished run against the manufactured fields are
/// accumulated streamingly by run_mms_error.
struct MmsErrors {
  double u = 0.0, w = 0.0, th = 0.0;
};
MmsErrors run_mms_error(const ManufacturedCase& mc, int nxy, double tau, double t_end);

struct StudyCell {
  double h = 0.0, tau = 0.0;
  double err_u = 0.0, err_w = 0.0, err_th = 0.0;
};

struct RateTable {
  std::vector<StudyCell> spatial;  // tau coupled to h^2
  std::vector<StudyCell> temporal; // fixed fine mesh
  double spatial_order_u = 0.0, spatial_order_w = 0.0, spatial_order_th = 0.0;
  double temporal_order_u = 0.0, temporal_order_w = 0.0, temporal_order_th = 0.0;
};

RateTable convergence_study(const ManufacturedCase& mc, const std::vector<int>& spatial_n,
                            double spatial_tau_coef, int temporal_n,
                            const std::vector<double>& temporal_tau, double t_end);

/// Successive-refinement self-distances without an exact solution: level l
/// vs level l+1 with (h, tau) -> (h/2, tau/4). scenario_at_level must return
/// finalized scenarios on generated rectangle meshes.
struct CauchyResult {
  std::vector<double> diff_u, diff_w, diff_th;
  bool strictly_decreasing() const;
};
CauchyResult cauchy_study(const std::function<Scenario(int)>& scenario_at_level, int levels);

/// One advance through the production path vs an independent dense oracle
/// (direct-quadrature assembly, nonlinear Gauss-Seidel with bisection for
/// the moisture step, dense LU for the linear steps). Returns the max nodal
/// deviation across U, W, Theta. Guard: at most 12 mesh nodes.
double oracle_step_check(const Scenario& sc);

} // namespace porous
