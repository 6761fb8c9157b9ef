#include "porous/diagnostics.hpp"

#include "porous/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace porous {

namespace {

std::pair<double, double> min_max(const std::vector<double>& f) {
  auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  return {*lo, *hi};
}

double grad_l2(const Scenario& sc, const NodalField& f) {
  double q = dot(f, sc.stiffness_unit.multiply(f));
  return std::sqrt(std::max(0.0, q));
}

} // namespace

double linf_overshoot(const std::vector<double>& field, const FieldBounds& bounds) {
  auto [lo, hi] = min_max(field);
  return std::max({0.0, bounds.lo - lo, hi - bounds.hi});
}

std::array<double, 3> linf_audit(const State& state, const Scenario& sc) {
  return {linf_overshoot(state.u, sc.bounds_u), linf_overshoot(state.w, sc.bounds_w),
          linf_overshoot(state.theta, sc.bounds_th)};
}

EnergyAudit energy_audit(const std::vector<State>& trajectory, const Scenario& sc) {
  EnergyAudit audit;
  if (trajectory.empty()) return audit;
  const Mesh& mesh = *sc.mesh;
  const NodalField& m = sc.lumped_unit;
  auto energy = [&](const NodalField& u) {
    double e = 0.0;
    for (int i = 0; i < mesh.node_count(); ++i)
      e += m[i] * sc.coeffs.eval_B_centered(u[i], sc.g_u);
    return e;
  };
  audit.energy0 = energy(trajectory[0].u);
  double dissipation = 0.0;
  audit.min_slack = 0.0;
  for (size_t n = 1; n < trajectory.size(); ++n) {
    NodalField a_nodal(mesh.node_count());
    for (int i = 0; i < mesh.node_count(); ++i)
      a_nodal[i] = sc.coeffs.eval_a(trajectory[n - 1].theta[i]);
    SparseMatrix k = assemble_stiffness(mesh, a_nodal);
    dissipation += sc.tau * dot(trajectory[n].u, k.multiply(trajectory[n].u));
    double slack = audit.energy0 - energy(trajectory[n].u) - dissipation;
    audit.slack.push_back(slack);
    audit.min_slack = std::min(audit.min_slack, slack);
  }
  audit.pass = audit.min_slack >= -1e-8 * (1.0 + audit.energy0);
  return audit;
}

TranslateAudit translate_audit(const std::vector<State>& trajectory, const Scenario& sc, int k) {
  const int p = static_cast<int>(trajectory.size()) - 1;
  if (p < 1) throw std::invalid_argument("translate_audit: trajectory has no steps");
  if (k < 1 || k > p)
    throw std::invalid_argument("translate_audit: k = " + std::to_string(k) +
                                " out of range [1, " + std::to_string(p) + "]");
  const NodalField& m = sc.lumped_unit;
  const int nn = sc.mesh->node_count();
  TranslateAudit out;
  for (int n = 0; n + k <= p; ++n) {
    const State& s0 = trajectory[n];
    const State& s1 = trajectory[n + k];
    double su = 0.0, sw = 0.0, sth = 0.0;
    for (int i = 0; i < nn; ++i) {
      double du = s1.u[i] - s0.u[i];
      su += m[i] * (sc.coeffs.eval_b(s1.u[i]) - sc.coeffs.eval_b(s0.u[i])) * du;
      double dw = s1.w[i] - s0.w[i];
      sw += m[i] * dw * dw;
      double dth = s1.theta[i] - s0.theta[i];
      sth += m[i] * dth * dth;
    }
    out.u += sc.tau * su;
    out.w += sc.tau * sw;
    out.th += sc.tau * sth;
  }
  return out;
}

std::array<double, 3> mass_audit(const State& state, const CoefficientSet& cs, const Mesh& mesh) {
  NodalField m = assemble_lumped_mass(mesh, NodalField(mesh.node_count(), 1.0));
  double mb = 0.0, mbw = 0.0, mbth = 0.0;
  for (int i = 0; i < mesh.node_count(); ++i) {
    double b = cs.eval_b(state.u[i]);
    mb += m[i] * b;
    mbw += m[i] * b * state.w[i];
    mbth += m[i] * (b + cs.rho) * state.theta[i];
  }
  return {mb, mbw, mbth};
}

DiagnosticsRow make_diagnostics_row(int step, const State& state, const Scenario& sc,
                                    double dissipation_cum, int newton_iters, int lin_iters_u,
                                    int lin_iters_w, int lin_iters_th) {
  DiagnosticsRow row;
  row.step = step;
  row.t = state.t;
  std::tie(row.min_u, row.max_u) = min_max(state.u);
  std::tie(row.min_w, row.max_w) = min_max(state.w);
  std::tie(row.min_th, row.max_th) = min_max(state.theta);

  const NodalField& m = sc.lumped_unit;
  row.energy_B = 0.0;
  for (int i = 0; i < sc.mesh->node_count(); ++i)
    row.energy_B += m[i] * sc.coeffs.eval_B_centered(state.u[i], sc.g_u);
  row.dissipation_cum = dissipation_cum;
  row.grad_u_l2 = grad_l2(sc, state.u);
  row.grad_w_l2 = grad_l2(sc, state.w);
  row.grad_th_l2 = grad_l2(sc, state.theta);

  auto mass = mass_audit(state, sc.coeffs, *sc.mesh);
  row.mass_b = mass[0];
  row.mass_bw = mass[1];
  row.mass_bth = mass[2];

  auto over = linf_audit(state, sc);
  row.overshoot_u = over[0];
  row.overshoot_w = over[1];
  row.overshoot_th = over[2];

  row.newton_iters = newton_iters;
  row.lin_iters_u = lin_iters_u;
  row.lin_iters_w = lin_iters_w;
  row.lin_iters_th = lin_iters_th;
  return row;
}

} // namespace porous
