#pragma once

#include "porous/assembly.hpp"
#include "porous/constitutive.hpp"
#include "porous/diagnostics.hpp"
#include "porous/linalg.hpp"
#include "porous/mesh.hpp"

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

namespace porous {

struct StepError : std::runtime_error {
  explicit StepError(const std::string& what) : std::runtime_error(what) {}
};

/// Discrete state at one time level.
struct State {
  double t = 0.0;
  NodalField u;
  NodalField w;
  NodalField theta;
};

using SpaceTimeFn = std::function<double(double x, double y, double t)>;

/// Everything one simulation needs. Boundary data is a constant level per
/// field (g_*); manufactured-solution runs may override it with a space-time
/// function (dir_*), in which case the maximum-principle and energy audits
/// are not meaningful and are skipped by the run loop.
struct Scenario {
  std::shared_ptr<const Mesh> mesh;
  CoefficientSet coeffs;

  double tau = 0.0;
  double t_end = 0.0;
  int steps = 0; // p = t_end / tau

  double g_u = 0.0, g_w = 0.0, g_th = 0.0;
  SpaceTimeFn dir_u, dir_w, dir_th; // optional, override the constants

  NodalField u0, w0, th0;

  SpaceTimeFn f_u, f_w, f_th; // volumetric sources, null = zero

  double newton_tol = 1e-9; // relative; scale = ||rhs|| + ||initial residual||
  int newton_max_iter = 50;
  double lin_tol = 1e-10;
  int lin_max_iter = -1; // < 0: 10 n
  bool upwind = false;

  FieldBounds bounds_u, bounds_w, bounds_th;
  double overshoot_tol_u = 1e-10;
  double overshoot_tol_wth = 1e-8;

  // Cached mesh-only operators (unit-weight lumped mass, unit stiffness).
  NodalField lumped_unit;
  SparseMatrix stiffness_unit;

  bool has_dirichlet() const { return !mesh->dirichlet_nodes.empty(); }
  bool has_sources() const { return static_cast<bool>(f_u) || static_cast<bool>(f_w) ||
                                    static_cast<bool>(f_th); }
  bool constant_dirichlet() const { return !dir_u && !dir_w && !dir_th; }

  /// Nodal Dirichlet values for one field at time t (full-length vector).
  NodalField dirichlet_values(int field, double t) const; // 0 = u, 1 = w, 2 = theta
};

/// Fills the cached operators and the m/M bounds, stamps boundary values
/// into the initial fields, and checks basic consistency. Must be called
/// once before stepping.
void finalize_scenario(Scenario& sc);

State initial_state(const Scenario& sc);

struct UStepResult {
  NodalField u;
  int newton_iters = 0;
  double newton_residual = 0.0; // final nonlinear residual (2-norm, free nodes)
  double newton_tol_used = 0.0;
  int lin_iters = 0;
  double dissipation_increment = 0.0; // tau * u' K(a(theta_prev)) u
};

/// Damped-Newton solve of the nonlinear moisture step
///   (1/tau) M_L (b(U) - b(U_prev)) + K(a(Theta_prev)) U = F.
UStepResult u_step(const State& prev, const Scenario& sc);

/// Linear solute step with lagged diffusion weight b(U_prev) D_w(U_prev) and
/// convection built from the fresh U.
std::pair<NodalField, SolveStats> w_step(const State& prev, const NodalField& u_new,
                                         const Scenario& sc);

/// Linear heat step with conductivity lambda(Theta_prev, U_prev).
std::pair<NodalField, SolveStats> theta_step(const State& prev, const NodalField& u_new,
                                             const Scenario& sc);

struct StepReport {
  int newton_iters = 0;
  double newton_residual = 0.0;
  SolveStats w_solve;
  SolveStats theta_solve;
  DiagnosticsRow diagnostics;
};

/// One full time step: u, then w and theta (mutually independent given U).
/// step_index and dissipation_cum_prev feed the diagnostics row. Sub-step
/// failures are rethrown with the step index attached.
std::pair<State, StepReport> advance(const State& prev, const Scenario& sc, int step_index,
                                     double dissipation_cum_prev);

struct RunCallbacks {
  // Called for the initial state (step 0) and after every accepted step.
  std::function<void(int step, const State&)> on_state;
  // Called for step 0 (bookkeeping row) and after every accepted step.
  std::function<void(const DiagnosticsRow&)> on_row;
};

struct RunSummary {
  State final_state;
  int steps_completed = 0;
  double wall_seconds = 0.0;

  double max_overshoot_u = 0.0, max_overshoot_w = 0.0, max_overshoot_th = 0.0;

  bool energy_applicable = false; // zero sources + constant Dirichlet data
  double energy0 = 0.0;
  double min_energy_slack = 0.0;

  bool conservation_applicable = false; // all-Neumann and zero sources
  double max_drift_b = 0.0, max_drift_bw = 0.0, max_drift_bth = 0.0; // relative

  std::vector<State> trajectory; // filled when keep_trajectory is set
};

RunSummary run(const Scenario& sc, const RunCallbacks& cb = {}, bool keep_trajectory = false);

} // namespace porous
