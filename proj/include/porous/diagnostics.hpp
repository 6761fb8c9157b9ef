#pragma once

#include <array>
#include <vector>

namespace porous {

struct State;
struct Scenario;
struct CoefficientSet;
struct Mesh;

/// Closed interval [lo, hi] a field is expected to stay inside (the discrete
/// maximum-principle bounds built from initial and boundary data).
struct FieldBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Per-step record of the a-priori-estimate quantities.
struct DiagnosticsRow {
  int step = 0;
  double t = 0.0;
  double min_u = 0.0, max_u = 0.0;
  double min_w = 0.0, max_w = 0.0;
  double min_th = 0.0, max_th = 0.0;
  double energy_B = 0.0;        // int B_g(u^n), lumped quadrature
  double dissipation_cum = 0.0; // sum_m tau * int a |grad u^m|^2
  double grad_u_l2 = 0.0, grad_w_l2 = 0.0, grad_th_l2 = 0.0;
  double mass_b = 0.0;   // int b(u)
  double mass_bw = 0.0;  // int b(u) w
  double mass_bth = 0.0; // int (b(u) + rho) theta
  double overshoot_u = 0.0, overshoot_w = 0.0, overshoot_th = 0.0;
  int newton_iters = 0;
  int lin_iters_u = 0, lin_iters_w = 0, lin_iters_th = 0;
};

/// max(0, lo - min f, max f - hi).
double linf_overshoot(const std::vector<double>& field, const FieldBounds& bounds);

/// Overshoots of (u, w, theta) against the scenario bounds.
std::array<double, 3> linf_audit(const State& state, const Scenario& sc);

struct EnergyAudit {
  double energy0 = 0.0;       // int B_g(u^0)
  std::vector<double> slack;  // slack_n for n = 1..p
  double min_slack = 0.0;
  bool pass = false; // min slack >= -1e-8 (1 + energy0)
};

/// slack_n = int B_g(u^0) - int B_g(u^n) - sum_{m<=n} tau int a(theta^{m-1})|grad u^m|^2.
/// Meaningful for zero-source runs with constant Dirichlet data.
EnergyAudit energy_audit(const std::vector<State>& trajectory, const Scenario& sc);

struct TranslateAudit {
  double u = 0.0;  // sum_n tau int (b(u^{n+k}) - b(u^n)) (u^{n+k} - u^n)
  double w = 0.0;  // sum_n tau int (w^{n+k} - w^n)^2
  double th = 0.0; // likewise for theta
};

/// Discrete time-translate sums over n = 0..p-k (inclusive; the symmetric
/// convention, exactly invariant under reversal of the stored trajectory).
/// Requires 1 <= k <= p where p = trajectory.size() - 1.
TranslateAudit translate_audit(const std::vector<State>& trajectory, const Scenario& sc, int k);

/// Lumped quadrature of the three conserved densities:
/// (int b(u), int b(u) w, int (b(u) + rho) theta).
std::array<double, 3> mass_audit(const State& state, const CoefficientSet& cs, const Mesh& mesh);

DiagnosticsRow make_diagnostics_row(int step, const State& state, const Scenario& sc,
                                    double dissipation_cum, int newton_iters, int lin_iters_u,
                                    int lin_iters_w, int lin_iters_th);

} // namespace porous
