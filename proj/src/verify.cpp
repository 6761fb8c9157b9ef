#include "porous/verify.hpp"

#include "porous/linalg.hpp"
#include "porous/log.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace porous {

namespace {

constexpr double kPi = 3.14159265358979323846;

Field3 constant_field(double c) {
  auto zero = [](double, double, double) { return 0.0; };
  return {[c](double, double, double) { return c; }, zero, zero, zero, zero, zero};
}

Field3 linear_field(double a0, double ax, double ay) {
  auto zero = [](double, double, double) { return 0.0; };
  return {[=](double x, double y, double) { return a0 + ax * x + ay * y; },
          [ax](double, double, double) { return ax; },
          [ay](double, double, double) { return ay; },
          zero,
          zero,
          zero};
}

/// c0 + amp * (ax x + ay y + a0) * (1 + ct t^2): linear in space so the P1
/// spatial error vanishes and the backward-Euler O(tau) error dominates.
Field3 poly_field(double c0, double amp, double a0, double ax, double ay, double ct) {
  auto zero = [](double, double, double) { return 0.0; };
  return {[=](double x, double y, double t) {
            return c0 + amp * (a0 + ax * x + ay * y) * (1.0 + ct * t * t);
          },
          [=](double, double, double t) { return amp * ax * (1.0 + ct * t * t); },
          [=](double, double, double t) { return amp * ay * (1.0 + ct * t * t); },
          [=](double x, double y, double t) {
            return amp * (a0 + ax * x + ay * y) * 2.0 * ct * t;
          },
          zero,
          zero};
}

/// c0 + amp e^{-r t} trig(pi x) trig(pi y); cosine = true uses cos in both
/// factors, else sin in both.
Field3 separable_field(double c0, double amp, double rate, bool cosine) {
  auto sx = [cosine](double x) { return cosine ? std::cos(kPi * x) : std::sin(kPi * x); };
  auto dsx = [cosine](double x) {
    return cosine ? -kPi * std::sin(kPi * x) : kPi * std::cos(kPi * x);
  };
  return {[=](double x, double y, double t) {
            return c0 + amp * std::exp(-rate * t) * sx(x) * sx(y);
          },
          [=](double x, double y, double t) {
            return amp * std::exp(-rate * t) * dsx(x) * sx(y);
          },
          [=](double x, double y, double t) {
            return amp * std::exp(-rate * t) * sx(x) * dsx(y);
          },
          [=](double x, double y, double t) {
            return -rate * amp * std::exp(-rate * t) * sx(x) * sx(y);
          },
          [=](double x, double y, double t) {
            return -kPi * kPi * amp * std::exp(-rate * t) * sx(x) * sx(y);
          },
          [=](double x, double y, double t) {
            return -kPi * kPi * amp * std::exp(-rate * t) * sx(x) * sx(y);
          }};
}

SpaceTimeFn make_f_u(Field3 u, Field3 th, CoefficientSet cs) {
  return [u, th, cs](double x, double y, double t) {
    double ut = u.dt(x, y, t), ux = u.dx(x, y, t), uy = u.dy(x, y, t);
    double lap_u = u.dxx(x, y, t) + u.dyy(x, y, t);
    double thv = th.val(x, y, t), thx = th.dx(x, y, t), thy = th.dy(x, y, t);
    double bp = cs.b.deriv(u.val(x, y, t));
    double av = cs.a.eval(thv), ap = cs.a.deriv(thv);
    return bp * ut - (ap * (thx * ux + thy * uy) + av * lap_u);
  };
}

SpaceTimeFn make_f_w(Field3 u, Field3 w, Field3 th, CoefficientSet cs) {
  return [u, w, th, cs](double x, double y, double t) {
    double uv = u.val(x, y, t), ux = u.dx(x, y, t), uy = u.dy(x, y, t);
    double ut = u.dt(x, y, t), lap_u = u.dxx(x, y, t) + u.dyy(x, y, t);
    double wv = w.val(x, y, t), wx = w.dx(x, y, t), wy = w.dy(x, y, t);
    double wt = w.dt(x, y, t), lap_w = w.dxx(x, y, t) + w.dyy(x, y, t);
    double thv = th.val(x, y, t), thx = th.dx(x, y, t), thy = th.dy(x, y, t);
    double bv = cs.b.eval(uv), bp = cs.b.deriv(uv);
    double dv = cs.dw.eval(uv), dp = cs.dw.deriv(uv);
    double av = cs.a.eval(thv), ap = cs.a.deriv(thv);
    double time_term = bp * ut * wv + bv * wt;
    double diff_term = (bp * dv + bv * dp) * (ux * wx + uy * wy) + bv * dv * lap_w;
    double conv_term =
        av * (wx * ux + wy * uy) + wv * ap * (thx * ux + thy * uy) + wv * av * lap_u;
    return time_term - diff_term - conv_term;
  };
}

SpaceTimeFn make_f_th(Field3 u, Field3 th, CoefficientSet cs) {
  return [u, th, cs](double x, double y, double t) {
    double uv = u.val(x, y, t), ux = u.dx(x, y, t), uy = u.dy(x, y, t);
    double ut = u.dt(x, y, t), lap_u = u.dxx(x, y, t) + u.dyy(x, y, t);
    double thv = th.val(x, y, t), thx = th.dx(x, y, t), thy = th.dy(x, y, t);
    double tht = th.dt(x, y, t), lap_th = th.dxx(x, y, t) + th.dyy(x, y, t);
    double bv = cs.b.eval(uv), bp = cs.b.deriv(uv);
    double lv = cs.lambda.eval(thv, uv);
    double lth = cs.lambda.dtheta(thv, uv), lu = cs.lambda.du(thv, uv);
    double av = cs.a.eval(thv), ap = cs.a.deriv(thv);
    double time_term = cs.rho * tht + bp * ut * thv + bv * tht;
    double diff_term = lth * (thx * thx + thy * thy) + lu * (ux * thx + uy * thy) + lv * lap_th;
    double conv_term =
        av * (thx * ux + thy * uy) + thv * ap * (thx * ux + thy * uy) + thv * av * lap_u;
    return time_term - diff_term - conv_term;
  };
}

} // namespace

std::vector<std::string> mms_catalog_ids() {
  return {"constant", "steady_linear", "poly_spacetime", "separable_sin"};
}

ManufacturedCase build_mms_case(const std::string& id, const CoefficientSet& cs) {
  ManufacturedCase mc;
  mc.id = id;
  mc.cs = cs;
  if (id == "constant") {
    mc.u = constant_field(0.3);
    mc.w = constant_field(0.7);
    mc.th = constant_field(-0.2);
  } else if (id == "steady_linear") {
    mc.u = linear_field(0.0, 1.0, 0.0);  // x
    mc.w = linear_field(0.0, 0.0, 1.0);  // y
    mc.th = linear_field(0.0, 1.0, 1.0); // x + y
  } else if (id == "poly_spacetime") {
    mc.u = poly_field(0.0, 0.4, -1.0, 1.0, 2.0, 1.0);
    mc.w = poly_field(0.5, 0.3, 0.0, 2.0, -1.0, 0.5);
    mc.th = poly_field(0.1, 0.2, 0.0, 1.0, 1.0, -0.25);
  } else if (id == "separable_sin") {
    // decay rates well above the slowest diffusion mode so the O(tau) error
    // stays visible over the P1 spatial floor in temporal sweeps
    mc.u = separable_field(0.0, 0.8, 3.0, false);
    mc.w = separable_field(0.5, 0.3, 2.1, false);
    mc.th = separable_field(0.2, 0.4, 1.5, true);
  } else {
    throw VerifyError("unknown manufactured case '" + id + "'");
  }
  mc.f_u = make_f_u(mc.u, mc.th, cs);
  mc.f_w = make_f_w(mc.u, mc.w, mc.th, cs);
  mc.f_th = make_f_th(mc.u, mc.th, cs);
  return mc;
}

double mms_fd_residual_max(const ManufacturedCase& mc, int samples, unsigned seed, double t_end,
                           double d) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> pos(0.1, 0.9);
  std::uniform_real_distribution<double> when(0.1 * t_end, 0.9 * t_end);
  const CoefficientSet& cs = mc.cs;
  const auto& u = mc.u.val;
  const auto& w = mc.w.val;
  const auto& th = mc.th.val;

  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    double x = pos(rng), y = pos(rng), t = when(rng);

    auto ddx = [&](auto&& f, double X, double Y) { return (f(X + d, Y) - f(X - d, Y)) / (2 * d); };
    auto ddy = [&](auto&& f, double X, double Y) { return (f(X, Y + d) - f(X, Y - d)) / (2 * d); };

    // moisture equation
    {
      double time_term = (cs.eval_b(u(x, y, t + d)) - cs.eval_b(u(x, y, t - d))) / (2 * d);
      auto flux_x = [&](double X, double Y) {
        return cs.eval_a(th(X, Y, t)) * ddx([&](double a1, double a2) { return u(a1, a2, t); }, X, Y);
      };
      auto flux_y = [&](double X, double Y) {
        return cs.eval_a(th(X, Y, t)) * ddy([&](double a1, double a2) { return u(a1, a2, t); }, X, Y);
      };
      double div = ddx(flux_x, x, y) + ddy(flux_y, x, y);
      worst = std::max(worst, std::fabs(mc.f_u(x, y, t) - (time_term - div)));
    }
    // solute equation
    {
      auto density = [&](double T) { return cs.eval_b(u(x, y, T)) * w(x, y, T); };
      double time_term = (density(t + d) - density(t - d)) / (2 * d);
      auto flux = [&](double X, double Y, bool xdir) {
        double uv = u(X, Y, t);
        double grad_w = xdir ? ddx([&](double a1, double a2) { return w(a1, a2, t); }, X, Y)
                             : ddy([&](double a1, double a2) { return w(a1, a2, t); }, X, Y);
        double grad_u = xdir ? ddx([&](double a1, double a2) { return u(a1, a2, t); }, X, Y)
                             : ddy([&](double a1, double a2) { return u(a1, a2, t); }, X, Y);
        return cs.eval_b(uv) * cs.eval_dw(uv) * grad_w +
               w(X, Y, t) * cs.eval_a(th(X, Y, t)) * grad_u;
      };
      double div = ddx([&](double X, double Y) { return flux(X, Y, true); }, x, y) +
                   ddy([&](double X, double Y) { return flux(X, Y, false); }, x, y);
      worst = std::max(worst, std::fabs(mc.f_w(x, y, t) - (time_term - div)));
    }
    // heat equation
    {
      auto density = [&](double T) {
        return (cs.rho + cs.eval_b(u(x, y, T))) * th(x, y, T);
      };
      double time_term = (density(t + d) - density(t - d)) / (2 * d);
      auto flux = [&](double X, double Y, bool xdir) {
        double grad_th = xdir ? ddx([&](double a1, double a2) { return th(a1, a2, t); }, X, Y)
                              : ddy([&](double a1, double a2) { return th(a1, a2, t); }, X, Y);
        double grad_u = xdir ? ddx([&](double a1, double a2) { return u(a1, a2, t); }, X, Y)
                             : ddy([&](double a1, double a2) { return u(a1, a2, t); }, X, Y);
        double thv = th(X, Y, t);
        return cs.eval_lambda(thv, u(X, Y, t)) * grad_th + thv * cs.eval_a(thv) * grad_u;
      };
      double div = ddx([&](double X, double Y) { return flux(X, Y, true); }, x, y) +
                   ddy([&](double X, double Y) { return flux(X, Y, false); }, x, y);
      worst = std::max(worst, std::fabs(mc.f_th(x, y, t) - (time_term - div)));
    }
  }
  return worst;
}

Scenario make_mms_scenario(const ManufacturedCase& mc, int nxy, double tau, double t_end) {
  SideMarkers all_d{EdgeMarker::Dirichlet, EdgeMarker::Dirichlet, EdgeMarker::Dirichlet,
                    EdgeMarker::Dirichlet};
  Scenario sc;
  sc.mesh = std::make_shared<Mesh>(generate_rect_mesh(nxy, nxy, 1.0, 1.0, all_d));
  sc.coeffs = mc.cs;
  sc.tau = tau;
  sc.t_end = t_end;
  sc.dir_u = mc.u.val;
  sc.dir_w = mc.w.val;
  sc.dir_th = mc.th.val;
  sc.f_u = mc.f_u;
  sc.f_w = mc.f_w;
  sc.f_th = mc.f_th;
  const int n = sc.mesh->node_count();
  sc.u0.resize(n);
  sc.w0.resize(n);
  sc.th0.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = sc.mesh->nodes[i][0], y = sc.mesh->nodes[i][1];
    sc.u0[i] = mc.u.val(x, y, 0.0);
    sc.w0[i] = mc.w.val(x, y, 0.0);
    sc.th0[i] = mc.th.val(x, y, 0.0);
  }
  sc.newton_tol = 1e-11;
  sc.lin_tol = 1e-11;
  finalize_scenario(sc);
  return sc;
}

MmsErrors run_mms_error(const ManufacturedCase& mc, int nxy, double tau, double t_end) {
  Scenario sc = make_mms_scenario(mc, nxy, tau, t_end);
  double acc_u = 0.0, acc_w = 0.0, acc_th = 0.0;
  RunCallbacks cb;
  cb.on_state = [&](int step, const State& s) {
    if (step == 0) return;
    for (int i = 0; i < sc.mesh->node_count(); ++i) {
      double x = sc.mesh->nodes[i][0], y = sc.mesh->nodes[i][1];
      double eu = s.u[i] - mc.u.val(x, y, s.t);
      double ew = s.w[i] - mc.w.val(x, y, s.t);
      double eth = s.theta[i] - mc.th.val(x, y, s.t);
      double wgt = sc.tau * sc.lumped_unit[i];
      acc_u += wgt * eu * eu;
      acc_w += wgt * ew * ew;
      acc_th += wgt * eth * eth;
    }
  };
  run(sc, cb);
  return {std::sqrt(acc_u), std::sqrt(acc_w), std::sqrt(acc_th)};
}

namespace {

double fit_order(const std::vector<double>& scale, const std::vector<double>& err) {
  // least-squares slope of log(err) against log(scale)
  const size_t n = scale.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    double x = std::log(scale[i]);
    double y = std::log(std::max(err[i], 1e-30));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = n * sxx - sx * sx;
  return denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
}

} // namespace

RateTable convergence_study(const ManufacturedCase& mc, const std::vector<int>& spatial_n,
                            double spatial_tau_coef, int temporal_n,
                            const std::vector<double>& temporal_tau, double t_end) {
  if (spatial_n.size() < 3 || temporal_tau.size() < 3)
    throw VerifyError("convergence_study needs at least 3 refinement levels per sweep");
  RateTable table;

  for (int n : spatial_n) {
    double h = 1.0 / n;
    double tau_target = spatial_tau_coef * h * h;
    int steps = std::max<int>(1, static_cast<int>(std::llround(t_end / tau_target)));
    double tau = t_end / steps;
    try {
      MmsErrors e = run_mms_error(mc, n, tau, t_end);
      table.spatial.push_back({h, tau, e.u, e.w, e.th});
      log::info("mms spatial cell h=1/" + std::to_string(n) + ": err_u=" + std::to_string(e.u) +
                " err_w=" + std::to_string(e.w) + " err_th=" + std::to_string(e.th));
    } catch (const std::exception& ex) {
      throw VerifyError("spatial study cell h=1/" + std::to_string(n) + ", tau=" +
                        std::to_string(tau) + " failed: " + ex.what());
    }
  }
  for (double tau : temporal_tau) {
    int steps = static_cast<int>(std::llround(t_end / tau));
    if (steps < 1 || std::fabs(steps * tau - t_end) > 1e-9 * std::max(1.0, t_end))
      throw VerifyError("temporal study: tau=" + std::to_string(tau) +
                        " does not divide t_end");
    try {
      MmsErrors e = run_mms_error(mc, temporal_n, tau, t_end);
      table.temporal.push_back({1.0 / temporal_n, tau, e.u, e.w, e.th});
      log::info("mms temporal cell tau=" + std::to_string(tau) + ": err_u=" +
                std::to_string(e.u) + " err_w=" + std::to_string(e.w) + " err_th=" +
                std::to_string(e.th));
    } catch (const std::exception& ex) {
      throw VerifyError("temporal study cell tau=" + std::to_string(tau) +
                        " failed: " + ex.what());
    }
  }

  std::vector<double> hs, tus, eu, ew, eth;
  for (const auto& c : table.spatial) {
    hs.push_back(c.h);
    eu.push_back(c.err_u);
    ew.push_back(c.err_w);
    eth.push_back(c.err_th);
  }
  table.spatial_order_u = fit_order(hs, eu);
  table.spatial_order_w = fit_order(hs, ew);
  table.spatial_order_th = fit_order(hs, eth);
  eu.clear();
  ew.clear();
  eth.clear();
  for (const auto& c : table.temporal) {
    tus.push_back(c.tau);
    eu.push_back(c.err_u);
    ew.push_back(c.err_w);
    eth.push_back(c.err_th);
  }
  table.temporal_order_u = fit_order(tus, eu);
  table.temporal_order_w = fit_order(tus, ew);
  table.temporal_order_th = fit_order(tus, eth);
  return table;
}

bool CauchyResult::strictly_decreasing() const {
  auto dec = [](const std::vector<double>& v) {
    for (size_t i = 1; i < v.size(); ++i)
      if (!(v[i] < v[i - 1])) return false;
    return true;
  };
  return dec(diff_u) && dec(diff_w) && dec(diff_th);
}

CauchyResult cauchy_study(const std::function<Scenario(int)>& scenario_at_level, int levels) {
  if (levels < 2) throw VerifyError("cauchy_study needs at least 2 levels");
  CauchyResult out;
  for (int l = 0; l + 1 < levels; ++l) {
    Scenario coarse_sc = scenario_at_level(l);
    Scenario fine_sc = scenario_at_level(l + 1);
    if (std::fabs(coarse_sc.t_end - fine_sc.t_end) > 1e-12 * std::max(1.0, coarse_sc.t_end))
      throw VerifyError("cauchy_study: levels disagree on t_end");
    int ratio = static_cast<int>(std::llround(coarse_sc.tau / fine_sc.tau));
    if (ratio < 1 || std::fabs(ratio * fine_sc.tau - coarse_sc.tau) > 1e-9 * coarse_sc.tau)
      throw VerifyError("cauchy_study: time steps do not nest between levels");

    RunSummary coarse = run(coarse_sc, {}, true);

    const Mesh& fm = *fine_sc.mesh;
    const Mesh& cm = *coarse_sc.mesh;
    int cached_idx = -1;
    std::array<NodalField, 3> cached; // coarse fields at fine nodes
    double acc_u = 0.0, acc_w = 0.0, acc_th = 0.0;

    RunCallbacks cb;
    cb.on_state = [&](int step, const State& s) {
      if (step == 0) return;
      int cidx = (step + ratio - 1) / ratio;
      if (cidx != cached_idx) {
        const State& cs_state = coarse.trajectory.at(cidx);
        for (auto* f : {&cached[0], &cached[1], &cached[2]}) f->resize(fm.node_count());
        for (int i = 0; i < fm.node_count(); ++i) {
          double x = fm.nodes[i][0], y = fm.nodes[i][1];
          cached[0][i] = eval_p1(cm, cs_state.u, x, y);
          cached[1][i] = eval_p1(cm, cs_state.w, x, y);
          cached[2][i] = eval_p1(cm, cs_state.theta, x, y);
        }
        cached_idx = cidx;
      }
      for (int i = 0; i < fm.node_count(); ++i) {
        double wgt = fine_sc.tau * fine_sc.lumped_unit[i];
        double du = s.u[i] - cached[0][i];
        double dw = s.w[i] - cached[1][i];
        double dth = s.theta[i] - cached[2][i];
        acc_u += wgt * du * du;
        acc_w += wgt * dw * dw;
        acc_th += wgt * dth * dth;
      }
    };
    run(fine_sc, cb);
    out.diff_u.push_back(std::sqrt(acc_u));
    out.diff_w.push_back(std::sqrt(acc_w));
    out.diff_th.push_back(std::sqrt(acc_th));
    log::info("cauchy levels " + std::to_string(l) + "->" + std::to_string(l + 1) + ": du=" +
              std::to_string(out.diff_u.back()) + " dw=" + std::to_string(out.diff_w.back()) +
              " dth=" + std::to_string(out.diff_th.back()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// dense oracle
// ---------------------------------------------------------------------------

namespace {

struct TriBasis {
  double area = 0.0;
  std::array<double, 3> beta{}, gamma{}; // phi_k = alpha_k + beta_k x + gamma_k y
};

TriBasis oracle_basis(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  std::vector<std::vector<double>> vand(3, std::vector<double>(3));
  for (int k = 0; k < 3; ++k)
    vand[k] = {1.0, mesh.nodes[tri[k]][0], mesh.nodes[tri[k]][1]};
  TriBasis b;
  for (int j = 0; j < 3; ++j) {
    std::vector<double> e(3, 0.0);
    e[j] = 1.0;
    std::vector<double> c = dense_lu_solve(vand, e);
    b.beta[j] = c[1];
    b.gamma[j] = c[2];
  }
  const auto& p0 = mesh.nodes[tri[0]];
  const auto& p1 = mesh.nodes[tri[1]];
  const auto& p2 = mesh.nodes[tri[2]];
  b.area = 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
  return b;
}

using DenseMat = std::vector<std::vector<double>>;

} // namespace

double oracle_step_check(const Scenario& sc) {
  const Mesh& mesh = *sc.mesh;
  const int n = mesh.node_count();
  if (n > 12)
    throw VerifyError("oracle_step_check: mesh has " + std::to_string(n) +
                      " nodes, exceeding the 12-node oracle guard");
  if (sc.lumped_unit.empty()) throw VerifyError("oracle_step_check: scenario not finalized");

  State prev = initial_state(sc);
  auto [prod, rep] = advance(prev, sc, 1, 0.0);
  (void)rep;

  const CoefficientSet& cs = sc.coeffs;
  const double tau = sc.tau;
  const double t_new = tau;

  std::vector<TriBasis> basis;
  basis.reserve(mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) basis.push_back(oracle_basis(mesh, t));

  std::vector<double> mass(n, 0.0);
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for (int v : mesh.triangles[t]) mass[v] += basis[t].area / 3.0;

  auto zeros = [&] { return DenseMat(n, std::vector<double>(n, 0.0)); };
  auto add_stiffness = [&](DenseMat& k, const std::vector<double>& coeff) {
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const auto& tri = mesh.triangles[t];
      const TriBasis& b = basis[t];
      double c_t = (coeff[tri[0]] + coeff[tri[1]] + coeff[tri[2]]) / 3.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          k[tri[i]][tri[j]] += c_t * (b.beta[i] * b.beta[j] + b.gamma[i] * b.gamma[j]) * b.area;
    }
  };
  auto add_convection = [&](DenseMat& c, const std::vector<double>& a_nodal,
                            const std::vector<double>& u) {
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const auto& tri = mesh.triangles[t];
      const TriBasis& b = basis[t];
      double a_t = (a_nodal[tri[0]] + a_nodal[tri[1]] + a_nodal[tri[2]]) / 3.0;
      double gux = 0.0, guy = 0.0;
      for (int k = 0; k < 3; ++k) {
        gux += u[tri[k]] * b.beta[k];
        guy += u[tri[k]] * b.gamma[k];
      }
      if (gux == 0.0 && guy == 0.0) continue;
      int up = 0;
      if (u[tri[1]] > u[tri[up]]) up = 1;
      if (u[tri[2]] > u[tri[up]]) up = 2;
      for (int i = 0; i < 3; ++i) {
        double flux = a_t * (gux * b.beta[i] + guy * b.gamma[i]) * b.area;
        if (sc.upwind) {
          c[tri[i]][tri[up]] += flux;
        } else {
          for (int j = 0; j < 3; ++j) c[tri[i]][tri[j]] += flux / 3.0;
        }
      }
    }
  };

  std::vector<char> constrained(n, 0);
  for (int i : mesh.dirichlet_nodes) constrained[i] = 1;

  auto source_at = [&](const SpaceTimeFn& f) {
    std::vector<double> out(n, 0.0);
    if (!f) return out;
    for (int i = 0; i < n; ++i)
      out[i] = mass[i] * f(mesh.nodes[i][0], mesh.nodes[i][1], t_new);
    return out;
  };

  // ---- moisture via nonlinear Gauss-Seidel with per-node bisection
  std::vector<double> a_nodal(n), b_prev(n);
  for (int i = 0; i < n; ++i) {
    a_nodal[i] = cs.eval_a(prev.theta[i]);
    b_prev[i] = cs.eval_b(prev.u[i]);
  }
  DenseMat k_a = zeros();
  add_stiffness(k_a, a_nodal);
  std::vector<double> f_u = source_at(sc.f_u);

  std::vector<double> u = prev.u;
  {
    NodalField g = sc.dirichlet_values(0, t_new);
    for (int i : mesh.dirichlet_nodes) u[i] = g[i];
  }

  auto bisect_node = [&](int i) {
    // psi is strictly increasing: mass_i b(.)/tau + K_ii (.) with K_ii > 0
    auto psi = [&](double xi) {
      double s = mass[i] * cs.eval_b(xi) / tau + k_a[i][i] * xi - mass[i] * b_prev[i] / tau -
                 f_u[i];
      for (int j = 0; j < n; ++j)
        if (j != i) s += k_a[i][j] * u[j];
      return s;
    };
    double init = u[i];
    double f0 = psi(init);
    if (f0 == 0.0) return init;
    double step = 1.0 + std::fabs(init);
    double lo, hi;
    if (f0 > 0.0) {
      hi = init;
      lo = init - step;
      int guard = 0;
      while (psi(lo) > 0.0) {
        step *= 2.0;
        lo -= step;
        if (++guard > 200) throw VerifyError("oracle bisection failed to bracket from above");
      }
    } else {
      lo = init;
      hi = init + step;
      int guard = 0;
      while (psi(hi) < 0.0) {
        step *= 2.0;
        hi += step;
        if (++guard > 200) throw VerifyError("oracle bisection failed to bracket from below");
      }
    }
    for (int it = 0; it < 300; ++it) {
      double mid = 0.5 * (lo + hi);
      double fm = psi(mid);
      if (fm == 0.0) return mid;
      (fm < 0.0 ? lo : hi) = mid;
      if (hi - lo <= 1e-16 * (1.0 + std::fabs(mid))) break;
    }
    return 0.5 * (lo + hi);
  };

  const int max_sweeps = 100000;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (int i = 0; i < n; ++i) {
      if (constrained[i]) continue;
      double xi = bisect_node(i);
      change = std::max(change, std::fabs(xi - u[i]));
      u[i] = xi;
    }
    if (change <= 1e-14 * (1.0 + norm_inf(u))) break;
  }
  if (sweep == max_sweeps)
    throw VerifyError("oracle Gauss-Seidel did not converge within " +
                      std::to_string(max_sweeps) + " sweeps");

  // ---- linear transport solves via dense LU with row-replaced constraints
  auto linear_oracle = [&](bool heat) {
    std::vector<double> diff(n);
    for (int i = 0; i < n; ++i)
      diff[i] = heat ? cs.eval_lambda(prev.theta[i], prev.u[i])
                     : cs.eval_b(prev.u[i]) * cs.eval_dw(prev.u[i]);
    DenseMat a = zeros();
    add_stiffness(a, diff);
    add_convection(a, a_nodal, u);
    const double extra = heat ? cs.rho : 0.0;
    for (int i = 0; i < n; ++i) a[i][i] += mass[i] * (cs.eval_b(u[i]) + extra) / tau;

    const std::vector<double>& prev_field = heat ? prev.theta : prev.w;
    std::vector<double> rhs = source_at(heat ? sc.f_th : sc.f_w);
    for (int i = 0; i < n; ++i) rhs[i] += mass[i] * (b_prev[i] + extra) * prev_field[i] / tau;

    NodalField g = sc.dirichlet_values(heat ? 2 : 1, t_new);
    for (int i : mesh.dirichlet_nodes) {
      std::fill(a[i].begin(), a[i].end(), 0.0);
      a[i][i] = 1.0;
      rhs[i] = g[i];
    }

    // mirror the iterative path's behavior for exactly stationary systems:
    // if the previous field already solves the system, return it unchanged
    std::vector<double> x0 = prev_field;
    for (int i : mesh.dirichlet_nodes) x0[i] = g[i];
    double r0 = 0.0;
    for (int i = 0; i < n; ++i) {
      double ri = rhs[i];
      for (int j = 0; j < n; ++j) ri -= a[i][j] * x0[j];
      r0 = std::max(r0, std::fabs(ri));
    }
    if (r0 == 0.0) return x0;
    return dense_lu_solve(a, rhs);
  };

  std::vector<double> w = linear_oracle(false);
  std::vector<double> th = linear_oracle(true);

  double dev = 0.0;
  for (int i = 0; i < n; ++i) {
    dev = std::max(dev, std::fabs(u[i] - prod.u[i]));
    dev = std::max(dev, std::fabs(w[i] - prod.w[i]));
    dev = std::max(dev, std::fabs(th[i] - prod.theta[i]));
  }
  return dev;
}

} // namespace porous
