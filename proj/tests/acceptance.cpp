// End-to-end acceptance gate. Each check prints exactly one PASS/FAIL line
// and the binary exits nonzero if any of them fail. The first argument is
// the directory with the bundled configuration files.
//
// The checks mirror the a-priori structure of the scheme: uniform bounds,
// energy dissipation, time-translate estimates, conservation, equivalence
// with dense reference solvers, manufactured-solution convergence orders,
// contraction under refinement, and the coefficient assumption validator.

#include "porous/cli.hpp"
#include "porous/config.hpp"
#include "porous/constitutive.hpp"
#include "porous/diagnostics.hpp"
#include "porous/mesh.hpp"
#include "porous/stepper.hpp"
#include "porous/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace porous;

namespace {

std::string g_dir;

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string replaced(std::string text, const std::string& from, const std::string& to) {
  size_t pos = text.find(from);
  if (pos == std::string::npos) throw std::runtime_error("pattern '" + from + "' not found");
  text.replace(pos, from.size(), to);
  return text;
}

Config load_config(const std::string& name) { return parse_config(g_dir + "/" + name); }

Scenario scenario_from(const std::string& name) { return cli::build_scenario(load_config(name)); }

CoefficientSet coefficients_from(const std::string& name) {
  Config cfg = load_config(name);
  std::map<std::string, std::string> raw;
  for (const std::string& key : cfg.keys("coefficients"))
    raw[key] = cfg.get_string("coefficients", key);
  return make_coefficient_set(raw);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_index = 0;
bool g_all_pass = true;

void report(const std::string& name, const std::function<Outcome()>& body) {
  ++g_index;
  auto t0 = std::chrono::steady_clock::now();
  Outcome oc;
  try {
    oc = body();
  } catch (const std::exception& e) {
    oc.pass = false;
    oc.detail = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s %d/9 %s: %s [%.1f s]\n", oc.pass ? "PASS" : "FAIL", g_index, name.c_str(),
              oc.detail.c_str(), secs);
  std::fflush(stdout);
  if (!oc.pass) g_all_pass = false;
}

// ---------------------------------------------------------------------------

Outcome check_u_bound() {
  Scenario sc = scenario_from("default.cfg");
  auto t0 = std::chrono::steady_clock::now();
  RunSummary s = run(sc);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool pass = s.max_overshoot_u <= 1e-10 && secs <= 30.0;
  return {pass, "max overshoot " + fmt(s.max_overshoot_u) + " (gate 1e-10), run " + fmt(secs) +
                    " s (budget 30 s)"};
}

Outcome check_wth_bounds() {
  Scenario coarse = scenario_from("default.cfg");
  RunSummary sc_sum = run(coarse);

  std::string text = slurp(g_dir + "/default.cfg");
  text = replaced(text, "nx = 16", "nx = 32");
  text = replaced(text, "ny = 16", "ny = 32");
  text = replaced(text, "tau = 0.01", "tau = 0.0025");
  Scenario fine = cli::build_scenario(parse_config_text(text, "default-32x32"));
  auto t0 = std::chrono::steady_clock::now();
  RunSummary sf_sum = run(fine);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  bool pass = sc_sum.max_overshoot_w <= 1e-8 && sc_sum.max_overshoot_th <= 1e-8 &&
              sf_sum.max_overshoot_w <= sc_sum.max_overshoot_w &&
              sf_sum.max_overshoot_th <= sc_sum.max_overshoot_th && secs <= 120.0;
  return {pass, "overshoots w/theta " + fmt(sc_sum.max_overshoot_w) + "/" +
                    fmt(sc_sum.max_overshoot_th) + " coarse, " + fmt(sf_sum.max_overshoot_w) +
                    "/" + fmt(sf_sum.max_overshoot_th) + " refined (gate 1e-8, non-increasing), " +
                    fmt(secs) + " s (budget 120 s)"};
}

Outcome check_energy_inequality() {
  const char* families[] = {"default.cfg", "family_linclamp.cfg", "family_atan.cfg",
                            "family_linear.cfg"};
  double worst = 1e300; // most negative normalized slack
  for (const char* name : families) {
    Scenario sc = scenario_from(name);
    RunSummary s = run(sc);
    if (!s.energy_applicable)
      return {false, std::string(name) + " is not a zero-source constant-Dirichlet run"};
    double allowed = -1e-8 * (1.0 + s.energy0);
    double normalized = s.min_energy_slack / (1.0 + s.energy0);
    worst = std::min(worst, normalized);
    if (s.min_energy_slack < allowed)
      return {false, std::string(name) + " min slack " + fmt(s.min_energy_slack) + " < " +
                         fmt(allowed)};
  }
  return {true, "4 coefficient families, worst normalized slack " + fmt(worst) +
                    " (gate -1e-8)"};
}

Outcome check_translate_estimates() {
  Scenario sc = scenario_from("default.cfg");
  RunSummary s = run(sc, {}, /*keep_trajectory=*/true);
  TranslateAudit base = translate_audit(s.trajectory, sc, 1);
  if (!(base.u > 0.0 && base.w > 0.0 && base.th > 0.0))
    return {false, "degenerate baseline translate sums"};
  double worst = 0.0;
  for (int k : {2, 4, 8}) {
    TranslateAudit t = translate_audit(s.trajectory, sc, k);
    // compare the k-translate rate t/(k tau) against the unit-translate rate
    worst = std::max({worst, t.u / (k * base.u), t.w / (k * base.w), t.th / (k * base.th)});
  }
  bool pass = worst <= 1.5;
  return {pass, "max rate ratio over k in {2,4,8}: " + fmt(worst) + " (gate 1.5)"};
}

Outcome check_conservation() {
  Scenario sc = scenario_from("neumann.cfg");
  RunSummary s = run(sc);
  if (!s.conservation_applicable) return {false, "closed-box run not recognized as conservative"};
  double drift = std::max({s.max_drift_b, s.max_drift_bw, s.max_drift_bth});
  bool pass = s.steps_completed == 100 && drift <= 1e-10;
  return {pass, "100 steps, max relative drift " + fmt(drift) + " (gate 1e-10)"};
}

Outcome check_oracle_equivalence() {
  Mesh mesh = read_mesh(g_dir + "/twotri.mesh");
  std::mt19937 rng(20260814u);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };

  double worst = 0.0;
  char buf[160];
  for (int draw = 0; draw < 20; ++draw) {
    std::map<std::string, std::string> raw;
    switch (pick(4)) {
      case 0:
        std::snprintf(buf, sizeof buf, "logistic lo=%g hi=%g rate=%g center=%g", uni(0.02, 0.1),
                      uni(0.3, 0.6), uni(0.1, 0.5), uni(-0.3, 0.3));
        break;
      case 1:
        std::snprintf(buf, sizeof buf, "atan lo=%g hi=%g rate=%g center=%g", uni(0.05, 0.15),
                      uni(0.35, 0.7), uni(0.2, 1.0), uni(-0.3, 0.3));
        break;
      case 2:
        std::snprintf(buf, sizeof buf, "linclamp lo=%g hi=%g z0=%g z1=%g", uni(0.05, 0.2),
                      uni(0.4, 0.8), -uni(40.0, 80.0), uni(40.0, 80.0));
        break;
      default:
        // offset dominates the slope so b stays positive on the data range
        std::snprintf(buf, sizeof buf, "linear offset=%g slope=%g", uni(0.3, 0.6),
                      uni(0.02, 0.15));
        break;
    }
    raw["b"] = buf;
    switch (pick(3)) {
      case 0:
        std::snprintf(buf, sizeof buf, "vg amin=%g amax=%g alpha=%g center=%g", uni(0.3, 0.6),
                      uni(0.8, 1.5), uni(0.1, 0.5), uni(-0.3, 0.3));
        break;
      case 1:
        std::snprintf(buf, sizeof buf, "logistic lo=%g hi=%g rate=%g center=%g", uni(0.4, 0.7),
                      uni(0.9, 1.5), uni(0.1, 0.5), uni(-0.2, 0.2));
        break;
      default:
        std::snprintf(buf, sizeof buf, "constant value=%g", uni(0.5, 2.0));
        break;
    }
    raw["a"] = buf;
    switch (pick(3)) {
      case 0:
        std::snprintf(buf, sizeof buf, "exp scale=%g rate=%g", uni(0.5, 3.0), uni(0.005, 0.05));
        break;
      case 1:
        std::snprintf(buf, sizeof buf, "constant value=%g", uni(0.3, 2.0));
        break;
      default:
        std::snprintf(buf, sizeof buf, "linear offset=%g slope=%g", uni(1.0, 2.0),
                      uni(0.0, 0.2));
        break;
    }
    raw["dw"] = buf;
    switch (pick(3)) {
      case 0:
        std::snprintf(buf, sizeof buf, "bounded lo=%g hi=%g ktheta=%g ku=%g", uni(0.5, 1.5),
                      uni(2.0, 4.0), uni(0.0, 0.3), uni(0.0, 0.3));
        break;
      case 1:
        std::snprintf(buf, sizeof buf, "constant value=%g", uni(0.5, 3.0));
        break;
      default:
        std::snprintf(buf, sizeof buf, "expprod l0=%g ktheta=%g ku=%g", uni(0.5, 2.0),
                      uni(0.0, 0.05), uni(0.0, 0.05));
        break;
    }
    raw["lambda"] = buf;
    std::snprintf(buf, sizeof buf, "%g", uni(0.2, 1.0));
    raw["b2"] = buf;
    std::snprintf(buf, sizeof buf, "%g", uni(0.3, 1.5));
    raw["rho"] = buf;

    Scenario sc;
    sc.mesh = std::make_shared<Mesh>(mesh);
    sc.coeffs = make_coefficient_set(raw);
    sc.tau = uni(0.02, 0.1);
    sc.t_end = sc.tau;
    sc.g_u = uni(-1.0, 1.0);
    sc.g_w = uni(-1.0, 1.0);
    sc.g_th = uni(-1.0, 1.0);
    int n = mesh.node_count();
    sc.u0.assign(n, 0.0);
    sc.w0.assign(n, 0.0);
    sc.th0.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      sc.u0[i] = uni(-1.0, 1.0);
      sc.w0[i] = uni(-1.0, 1.0);
      sc.th0[i] = uni(-1.0, 1.0);
    }
    sc.newton_tol = 1e-12;
    sc.lin_tol = 1e-13;
    sc.newton_max_iter = 80;
    finalize_scenario(sc);

    worst = std::max(worst, oracle_step_check(sc));
  }
  bool pass = worst <= 1e-8;
  return {pass, "20 randomized draws, max nodal deviation " + fmt(worst) + " (gate 1e-8)"};
}

Outcome check_mms_orders() {
  auto t0 = std::chrono::steady_clock::now();
  CoefficientSet cs = coefficients_from("mms.cfg");
  ManufacturedCase mc = build_mms_case("separable_sin", cs);

  double fd = mms_fd_residual_max(mc, 200, 20260814u, 1.0);
  if (fd > 1e-6) return {false, "manufactured sources disagree with finite differences: " + fmt(fd)};

  RateTable t = convergence_study(mc, {8, 16, 32}, 1.0, 64, {0.1, 0.05, 0.025}, 1.0);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double sp = std::min({t.spatial_order_u, t.spatial_order_w, t.spatial_order_th});
  double tp = std::min({t.temporal_order_u, t.temporal_order_w, t.temporal_order_th});
  bool pass = sp >= 1.7 && tp >= 0.8 && secs <= 600.0;
  return {pass, "spatial orders " + fmt(t.spatial_order_u) + "/" + fmt(t.spatial_order_w) + "/" +
                    fmt(t.spatial_order_th) + " (gate 1.7), temporal " +
                    fmt(t.temporal_order_u) + "/" + fmt(t.temporal_order_w) + "/" +
                    fmt(t.temporal_order_th) + " (gate 0.8), " + fmt(secs) +
                    " s (budget 600 s)"};
}

Outcome check_cauchy_refinement() {
  std::string base = slurp(g_dir + "/default.cfg");
  auto level_scenario = [&](int level) {
    int n = 8 << level;
    double tau = 0.04 / std::pow(4.0, level);
    char nbuf[32], taubuf[48];
    std::snprintf(nbuf, sizeof nbuf, "%d", n);
    std::snprintf(taubuf, sizeof taubuf, "%.17g", tau);
    std::string text = base;
    text = replaced(text, "nx = 16", std::string("nx = ") + nbuf);
    text = replaced(text, "ny = 16", std::string("ny = ") + nbuf);
    text = replaced(text, "tau = 0.01", std::string("tau = ") + taubuf);
    return cli::build_scenario(parse_config_text(text, "cauchy-level-" + std::to_string(level)));
  };
  CauchyResult res = cauchy_study(level_scenario, 4);
  bool pass = res.strictly_decreasing();
  std::string detail = "u " + fmt(res.diff_u[0]) + ">" + fmt(res.diff_u[1]) + ">" +
                       fmt(res.diff_u[2]) + ", w " + fmt(res.diff_w[0]) + ">" +
                       fmt(res.diff_w[1]) + ">" + fmt(res.diff_w[2]) + ", theta " +
                       fmt(res.diff_th[0]) + ">" + fmt(res.diff_th[1]) + ">" +
                       fmt(res.diff_th[2]);
  return {pass, detail + (pass ? " (strictly decreasing)" : " (NOT strictly decreasing)")};
}

Outcome check_validator() {
  const char* good[] = {"default.cfg",       "family_linclamp.cfg", "family_atan.cfg",
                        "family_linear.cfg", "neumann.cfg",         "mms.cfg",
                        "oracle.cfg"};
  for (const char* name : good) {
    ValidationReport rep = validate_assumptions(coefficients_from(name), -50.0, 50.0, 10000);
    if (!rep.pass) {
      for (const ValidationClause& c : rep.clauses)
        if (!c.pass) return {false, std::string(name) + " rejected: " + c.name};
      return {false, std::string(name) + " rejected"};
    }
  }

  auto sole_failure = [&](const std::string& name, const std::string& expected,
                          std::string& why) {
    ValidationReport rep = validate_assumptions(coefficients_from(name), -50.0, 50.0, 10000);
    if (rep.pass) {
      why = name + " was accepted";
      return false;
    }
    std::vector<std::string> failed;
    for (const ValidationClause& c : rep.clauses)
      if (!c.pass) failed.push_back(c.name);
    if (failed.size() != 1 || failed[0] != expected) {
      why = name + " failed the wrong clause set";
      return false;
    }
    return true;
  };

  std::string why;
  if (!sole_failure("broken_constant_b.cfg", "(i) strict monotonicity of b", why))
    return {false, why};
  if (!sole_failure("broken_lambda.cfg", "(ii) positivity of lambda", why)) return {false, why};
  return {true, "7 bundled families admissible on [-50,50] x 10^4 samples; "
                "both broken fixtures rejected with the correct clause"};
}

} // namespace

int main(int argc, char** argv) {
  if (argc > 1) {
    g_dir = argv[1];
  } else {
    g_dir = (std::filesystem::path(__FILE__).parent_path().parent_path() / "configs").string();
  }

  report("uniform bound for u", check_u_bound);
  report("uniform bounds for w and theta under refinement", check_wth_bounds);
  report("energy dissipation inequality", check_energy_inequality);
  report("time-translate estimates", check_translate_estimates);
  report("closed-box conservation", check_conservation);
  report("dense oracle equivalence", check_oracle_equivalence);
  report("manufactured-solution convergence orders", check_mms_orders);
  report("Cauchy refinement contraction", check_cauchy_refinement);
  report("coefficient assumption validator", check_validator);

  std::printf("%s\n", g_all_pass ? "all acceptance checks passed"
                                 : "ACCEPTANCE FAILURE: see lines above");
  return g_all_pass ? 0 : 1;
}
