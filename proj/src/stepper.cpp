#include "porous/stepper.hpp"

#include "porous/log.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <limits>

namespace porous {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

NodalField coeff_of(const CoefficientSet& cs, double (CoefficientSet::*f)(double) const,
                    const NodalField& z) {
  NodalField out(z.size());
  for (size_t i = 0; i < z.size(); ++i) out[i] = (cs.*f)(z[i]);
  return out;
}

/// M_i * f(x_i, y_i, t); zero vector when f is null.
NodalField lumped_source(const Scenario& sc, const SpaceTimeFn& f, double t) {
  NodalField out(sc.mesh->node_count(), 0.0);
  if (!f) return out;
  for (int i = 0; i < sc.mesh->node_count(); ++i)
    out[i] = sc.lumped_unit[i] * f(sc.mesh->nodes[i][0], sc.mesh->nodes[i][1], t);
  return out;
}

void stamp(NodalField& field, const std::vector<int>& nodes, const NodalField& values) {
  for (int i : nodes) field[i] = values[i];
}

} // namespace

NodalField Scenario::dirichlet_values(int field, double t) const {
  double level = field == 0 ? g_u : (field == 1 ? g_w : g_th);
  const SpaceTimeFn& fn = field == 0 ? dir_u : (field == 1 ? dir_w : dir_th);
  NodalField v(mesh->node_count(), level);
  if (fn) {
    for (int i = 0; i < mesh->node_count(); ++i) v[i] = fn(mesh->nodes[i][0], mesh->nodes[i][1], t);
  }
  return v;
}

void finalize_scenario(Scenario& sc) {
  if (!sc.mesh) throw StepError("scenario has no mesh");
  const int n = sc.mesh->node_count();
  if (!(sc.tau > 0.0)) throw StepError("scenario needs tau > 0");
  if (sc.t_end < 0.0) throw StepError("scenario needs t_end >= 0");
  sc.steps = static_cast<int>(std::llround(sc.t_end / sc.tau));
  if (std::fabs(sc.steps * sc.tau - sc.t_end) > 1e-9 * std::max(1.0, sc.t_end))
    throw StepError("t_end must be an integer multiple of tau");
  if (sc.newton_max_iter < 1 || !(sc.newton_tol > 0.0))
    throw StepError("invalid Newton parameters");
  if (!(sc.lin_tol > 0.0) || sc.lin_tol >= 1.0)
    throw StepError("linear tolerance must lie in (0, 1)");

  for (NodalField* f : {&sc.u0, &sc.w0, &sc.th0}) {
    if (static_cast<int>(f->size()) != n)
      throw StepError("initial field length does not match the mesh");
    for (double v : *f)
      if (!std::isfinite(v)) throw StepError("initial field contains a non-finite value");
  }

  stamp(sc.u0, sc.mesh->dirichlet_nodes, sc.dirichlet_values(0, 0.0));
  stamp(sc.w0, sc.mesh->dirichlet_nodes, sc.dirichlet_values(1, 0.0));
  stamp(sc.th0, sc.mesh->dirichlet_nodes, sc.dirichlet_values(2, 0.0));

  sc.lumped_unit = assemble_lumped_mass(*sc.mesh, NodalField(n, 1.0));
  sc.stiffness_unit = assemble_stiffness(*sc.mesh, NodalField(n, 1.0));

  auto bounds_for = [&](const NodalField& f0, double g, bool use_g) {
    FieldBounds b;
    b.lo = *std::min_element(f0.begin(), f0.end());
    b.hi = *std::max_element(f0.begin(), f0.end());
    if (use_g) {
      b.lo = std::min(b.lo, g);
      b.hi = std::max(b.hi, g);
    }
    return b;
  };
  bool constant_g = sc.constant_dirichlet() && sc.has_dirichlet();
  sc.bounds_u = bounds_for(sc.u0, sc.g_u, constant_g);
  sc.bounds_w = bounds_for(sc.w0, sc.g_w, constant_g);
  sc.bounds_th = bounds_for(sc.th0, sc.g_th, constant_g);

  if (!sc.has_dirichlet())
    log::info("all-Neumann boundary: conservation test mode (the continuous analysis requires a "
              "nonempty Dirichlet part)");
}

State initial_state(const Scenario& sc) { return State{0.0, sc.u0, sc.w0, sc.th0}; }

UStepResult u_step(const State& prev, const Scenario& sc) {
  const Mesh& mesh = *sc.mesh;
  const int n = mesh.node_count();
  const double tau = sc.tau;
  const double t_new = prev.t + tau;
  const NodalField& m = sc.lumped_unit;
  const std::vector<int>& dn = mesh.dirichlet_nodes;

  NodalField a_nodal = coeff_of(sc.coeffs, &CoefficientSet::eval_a, prev.theta);
  SparseMatrix k = assemble_stiffness(mesh, a_nodal);

  NodalField rhs_base = lumped_source(sc, sc.f_u, t_new);
  for (int i = 0; i < n; ++i) rhs_base[i] += m[i] * sc.coeffs.eval_b(prev.u[i]) / tau;

  NodalField u = prev.u;
  stamp(u, dn, sc.dirichlet_values(0, t_new));

  auto residual = [&](const NodalField& v, NodalField& r) {
    k.multiply(v, r);
    for (int i = 0; i < n; ++i) r[i] += m[i] * sc.coeffs.eval_b(v[i]) / tau - rhs_base[i];
    for (int i : dn) r[i] = 0.0;
  };

  NodalField r(n);
  residual(u, r);
  double rnorm = norm2(r);

  NodalField rhs_free = rhs_base;
  for (int i : dn) rhs_free[i] = 0.0;
  const double scale = norm2(rhs_free) + rnorm;
  const double tol = sc.newton_tol * scale;

  UStepResult out;
  out.newton_tol_used = tol;
  const NodalField zero(n, 0.0);
  const double floor = std::ldexp(1.0, -20);

  while (rnorm > tol) {
    if (out.newton_iters >= sc.newton_max_iter)
      throw StepError("u-step: Newton did not converge in " +
                      std::to_string(sc.newton_max_iter) + " iterations (residual " +
                      num(rnorm) + ", tolerance " + num(tol) + ")");
    SparseMatrix jac = k;
    NodalField diag(n);
    for (int i = 0; i < n; ++i) diag[i] = m[i] * sc.coeffs.eval_b_prime(u[i]) / tau;
    jac.add_diagonal(diag);
    NodalField rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = -r[i];
    apply_dirichlet(jac, rhs, dn, zero, dn);

    auto [delta, stats] = cg_solve(jac, rhs, zero, sc.lin_tol, sc.lin_max_iter);
    out.lin_iters += stats.iterations;
    if (!stats.converged)
      throw StepError("u-step: inner CG solve stalled (relative residual " +
                      num(stats.final_residual) + ")");

    double lambda = 1.0;
    bool accepted = false;
    NodalField u_trial(n), r_trial(n);
    while (lambda >= floor) {
      for (int i = 0; i < n; ++i) u_trial[i] = u[i] + lambda * delta[i];
      residual(u_trial, r_trial);
      double rt = norm2(r_trial);
      if (rt < rnorm || rt <= tol) {
        u.swap(u_trial);
        r.swap(r_trial);
        rnorm = rt;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted)
      throw StepError("u-step: line search hit the 2^-20 damping floor (residual " +
                      num(rnorm) + ")");
    ++out.newton_iters;
    log::debug("newton iter " + std::to_string(out.newton_iters) + ": residual " +
               num(rnorm) + ", damping " + num(lambda));
  }

  out.newton_residual = rnorm;
  out.dissipation_increment = tau * dot(u, k.multiply(u));
  out.u = std::move(u);
  return out;
}

namespace {

std::pair<NodalField, SolveStats> transport_step(const State& prev, const NodalField& u_new,
                                                 const Scenario& sc, bool heat) {
  const Mesh& mesh = *sc.mesh;
  const int n = mesh.node_count();
  const double tau = sc.tau;
  const double t_new = prev.t + tau;
  const NodalField& m = sc.lumped_unit;
  const std::vector<int>& dn = mesh.dirichlet_nodes;

  NodalField diff_coeff(n);
  if (heat) {
    for (int i = 0; i < n; ++i)
      diff_coeff[i] = sc.coeffs.eval_lambda(prev.theta[i], prev.u[i]);
  } else {
    for (int i = 0; i < n; ++i)
      diff_coeff[i] = sc.coeffs.eval_b(prev.u[i]) * sc.coeffs.eval_dw(prev.u[i]);
  }
  SparseMatrix a_mat = assemble_stiffness(mesh, diff_coeff);
  NodalField a_nodal = coeff_of(sc.coeffs, &CoefficientSet::eval_a, prev.theta);
  a_mat.add_scaled(assemble_convection(mesh, a_nodal, u_new, sc.upwind), 1.0);

  const double extra = heat ? sc.coeffs.rho : 0.0;
  NodalField diag(n);
  for (int i = 0; i < n; ++i) diag[i] = m[i] * (sc.coeffs.eval_b(u_new[i]) + extra) / tau;
  a_mat.add_diagonal(diag);

  const NodalField& prev_field = heat ? prev.theta : prev.w;
  NodalField rhs = lumped_source(sc, heat ? sc.f_th : sc.f_w, t_new);
  for (int i = 0; i < n; ++i)
    rhs[i] += m[i] * (sc.coeffs.eval_b(prev.u[i]) + extra) * prev_field[i] / tau;

  NodalField g = sc.dirichlet_values(heat ? 2 : 1, t_new);
  apply_dirichlet(a_mat, rhs, dn, g, dn);

  NodalField x0 = prev_field;
  stamp(x0, dn, g);
  auto [x, stats] = bicgstab_solve(a_mat, rhs, x0, sc.lin_tol, sc.lin_max_iter);
  if (!stats.converged)
    throw StepError(std::string(heat ? "theta" : "w") +
                    "-step: BiCGStab did not converge (relative residual " +
                    num(stats.final_residual) + ")");
  return {std::move(x), stats};
}

} // namespace

std::pair<NodalField, SolveStats> w_step(const State& prev, const NodalField& u_new,
                                         const Scenario& sc) {
  return transport_step(prev, u_new, sc, false);
}

std::pair<NodalField, SolveStats> theta_step(const State& prev, const NodalField& u_new,
                                             const Scenario& sc) {
  return transport_step(prev, u_new, sc, true);
}

std::pair<State, StepReport> advance(const State& prev, const Scenario& sc, int step_index,
                                     double dissipation_cum_prev) {
  try {
    UStepResult ur = u_step(prev, sc);
    auto [w_new, w_stats] = w_step(prev, ur.u, sc);
    auto [th_new, th_stats] = theta_step(prev, ur.u, sc);

    State next;
    next.t = prev.t + sc.tau;
    next.u = std::move(ur.u);
    next.w = std::move(w_new);
    next.theta = std::move(th_new);

    StepReport rep;
    rep.newton_iters = ur.newton_iters;
    rep.newton_residual = ur.newton_residual;
    rep.w_solve = w_stats;
    rep.theta_solve = th_stats;
    rep.diagnostics = make_diagnostics_row(
        step_index, next, sc, dissipation_cum_prev + ur.dissipation_increment, ur.newton_iters,
        ur.lin_iters, w_stats.iterations, th_stats.iterations);
    return {std::move(next), std::move(rep)};
  } catch (const StepError& e) {
    throw StepError("step " + std::to_string(step_index) + " (t = " +
                    std::to_string(prev.t + sc.tau) + "): " + e.what());
  } catch (const LinAlgError& e) {
    throw StepError("step " + std::to_string(step_index) + " (t = " +
                    std::to_string(prev.t + sc.tau) + "): " + e.what());
  } catch (const AssemblyError& e) {
    throw StepError("step " + std::to_string(step_index) + " (t = " +
                    std::to_string(prev.t + sc.tau) + "): " + e.what());
  }
}

RunSummary run(const Scenario& sc, const RunCallbacks& cb, bool keep_trajectory) {
  auto clock_start = std::chrono::steady_clock::now();

  RunSummary sum;
  sum.energy_applicable = !sc.has_sources() && sc.constant_dirichlet();
  sum.conservation_applicable = !sc.has_dirichlet() && !sc.has_sources();

  State state = initial_state(sc);
  DiagnosticsRow row0 = make_diagnostics_row(0, state, sc, 0.0, 0, 0, 0, 0);
  sum.energy0 = row0.energy_B;
  const std::array<double, 3> mass0 = {row0.mass_b, row0.mass_bw, row0.mass_bth};
  sum.max_overshoot_u = row0.overshoot_u;
  sum.max_overshoot_w = row0.overshoot_w;
  sum.max_overshoot_th = row0.overshoot_th;

  if (cb.on_state) cb.on_state(0, state);
  if (cb.on_row) cb.on_row(row0);
  if (keep_trajectory) sum.trajectory.push_back(state);

  double dissipation = 0.0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (int step = 1; step <= sc.steps; ++step) {
    auto [next, rep] = advance(state, sc, step, dissipation);
    state = std::move(next);
    const DiagnosticsRow& row = rep.diagnostics;
    dissipation = row.dissipation_cum;

    sum.max_overshoot_u = std::max(sum.max_overshoot_u, row.overshoot_u);
    sum.max_overshoot_w = std::max(sum.max_overshoot_w, row.overshoot_w);
    sum.max_overshoot_th = std::max(sum.max_overshoot_th, row.overshoot_th);
    min_slack = std::min(min_slack, sum.energy0 - row.energy_B - row.dissipation_cum);

    auto drift = [&](double now, double ref) {
      return std::fabs(now - ref) / (std::fabs(ref) > 0.0 ? std::fabs(ref) : 1.0);
    };
    sum.max_drift_b = std::max(sum.max_drift_b, drift(row.mass_b, mass0[0]));
    sum.max_drift_bw = std::max(sum.max_drift_bw, drift(row.mass_bw, mass0[1]));
    sum.max_drift_bth = std::max(sum.max_drift_bth, drift(row.mass_bth, mass0[2]));

    if (cb.on_state) cb.on_state(step, state);
    if (cb.on_row) cb.on_row(row);
    if (keep_trajectory) sum.trajectory.push_back(state);
    sum.steps_completed = step;
  }
  sum.min_energy_slack = sc.steps > 0 ? min_slack : 0.0;
  sum.final_state = std::move(state);
  sum.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return sum;
}

} // namespace porous
