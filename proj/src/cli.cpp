#include "porous/cli.hpp"

#include "porous/constitutive.hpp"
#include "porous/expr.hpp"
#include "porous/log.hpp"
#include "porous/output.hpp"
#include "porous/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace porous::cli {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void key_error(const Config& cfg, const std::string& section,
                            const std::string& key, const std::string& what) {
  throw ConfigError(cfg.source_name() + ": [" + section + "] " + key + " " + what + " (line " +
                    std::to_string(cfg.line_of(section, key)) + ")");
}

EdgeMarker parse_marker(const Config& cfg, const char* key, EdgeMarker fallback) {
  if (!cfg.has("mesh", key)) return fallback;
  std::string v = cfg.get_string("mesh", key);
  if (v == "D") return EdgeMarker::Dirichlet;
  if (v == "N") return EdgeMarker::Neumann;
  key_error(cfg, "mesh", key, "must be D or N, got '" + v + "'");
}

NodalField nodal_from_expr(const Config& cfg, const char* key, const Mesh& mesh) {
  std::string text = cfg.get_string("initial", key);
  try {
    Expr e = Expr::parse(text);
    NodalField f(mesh.node_count());
    for (int i = 0; i < mesh.node_count(); ++i) f[i] = e.eval(mesh.nodes[i][0], mesh.nodes[i][1]);
    return f;
  } catch (const ExprError& ex) {
    key_error(cfg, "initial", key, std::string("is not a valid expression: ") + ex.what());
  }
}

std::vector<int> parse_int_list(const Config& cfg, const std::string& section,
                                const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stoi(item, &pos));
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      key_error(cfg, section, key, "has a non-integer entry '" + item + "'");
    }
  }
  if (out.empty()) key_error(cfg, section, key, "must be a comma-separated integer list");
  return out;
}

std::vector<double> parse_double_list(const Config& cfg, const std::string& section,
                                      const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      key_error(cfg, section, key, "has a non-numeric entry '" + item + "'");
    }
  }
  if (out.empty()) key_error(cfg, section, key, "must be a comma-separated list");
  return out;
}

CoefficientSet coefficients_from_config(const Config& cfg) {
  std::map<std::string, std::string> raw;
  for (const std::string& key : cfg.keys("coefficients"))
    raw[key] = cfg.get_string("coefficients", key);
  return make_coefficient_set(raw);
}

void consume_section(const Config& cfg, const std::string& section) {
  for (const std::string& key : cfg.keys(section)) cfg.mark_consumed(section, key);
}

/// Exceptions that mean "the input was bad", mapped to exit 64.
template <class Fn>
bool usage_phase(Fn&& fn, std::ostream& err) {
  try {
    fn();
    return true;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const ExprError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const CoefficientError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const MeshError& e) {
    err << "config error: " << e.what() << "\n";
  }
  return false;
}

} // namespace

CheckMode parse_check_mode(const std::string& text) {
  if (text == "off") return CheckMode::Off;
  if (text == "report") return CheckMode::Report;
  if (text == "strict") return CheckMode::Strict;
  throw ConfigError("--check-invariants must be off, report or strict, got '" + text + "'");
}

Scenario build_scenario(const Config& cfg) {
  Scenario sc;

  // [mesh]
  if (cfg.has("mesh", "file")) {
    for (const char* key : {"nx", "ny", "lx", "ly", "left", "right", "bottom", "top"})
      if (cfg.has("mesh", key))
        key_error(cfg, "mesh", key, "cannot be combined with an external mesh file");
    std::filesystem::path mesh_path(cfg.get_string("mesh", "file"));
    if (mesh_path.is_relative()) {
      // relative to the config file so config bundles stay relocatable
      std::filesystem::path base = std::filesystem::path(cfg.source_name()).parent_path();
      if (!base.empty()) mesh_path = base / mesh_path;
    }
    sc.mesh = std::make_shared<Mesh>(read_mesh(mesh_path.string()));
  } else {
    int nx = cfg.get_int("mesh", "nx");
    int ny = cfg.get_int("mesh", "ny");
    if (nx < 1) key_error(cfg, "mesh", "nx", "must be at least 1");
    if (ny < 1) key_error(cfg, "mesh", "ny", "must be at least 1");
    double lx = cfg.get_double("mesh", "lx", 1.0);
    double ly = cfg.get_double("mesh", "ly", 1.0);
    if (!(lx > 0.0)) key_error(cfg, "mesh", "lx", "must be positive");
    if (!(ly > 0.0)) key_error(cfg, "mesh", "ly", "must be positive");
    SideMarkers mk;
    mk.left = parse_marker(cfg, "left", EdgeMarker::Dirichlet);
    mk.right = parse_marker(cfg, "right", EdgeMarker::Neumann);
    mk.bottom = parse_marker(cfg, "bottom", EdgeMarker::Neumann);
    mk.top = parse_marker(cfg, "top", EdgeMarker::Neumann);
    sc.mesh = std::make_shared<Mesh>(generate_rect_mesh(nx, ny, lx, ly, mk));
  }

  sc.coeffs = coefficients_from_config(cfg);

  // [time]
  sc.tau = cfg.get_double("time", "tau");
  if (!(sc.tau > 0.0))
    throw ConfigError(cfg.source_name() + ": tau must be positive (line " +
                      std::to_string(cfg.line_of("time", "tau")) + ")");
  sc.t_end = cfg.get_double("time", "t_end");
  if (!(sc.t_end > 0.0))
    throw ConfigError(cfg.source_name() + ": t_end must be positive (line " +
                      std::to_string(cfg.line_of("time", "t_end")) + ")");

  // [boundary]
  sc.g_u = cfg.get_double("boundary", "g_u", 0.0);
  sc.g_w = cfg.get_double("boundary", "g_w", 0.0);
  sc.g_th = cfg.get_double("boundary", "g_th", 0.0);

  // [initial]
  sc.u0 = nodal_from_expr(cfg, "u", *sc.mesh);
  sc.w0 = nodal_from_expr(cfg, "w", *sc.mesh);
  sc.th0 = nodal_from_expr(cfg, "th", *sc.mesh);

  // [solver]
  sc.newton_tol = cfg.get_double("solver", "newton_tol", sc.newton_tol);
  sc.newton_max_iter = cfg.get_int("solver", "newton_max_iter", sc.newton_max_iter);
  sc.lin_tol = cfg.get_double("solver", "lin_tol", sc.lin_tol);
  sc.lin_max_iter = cfg.get_int("solver", "lin_max_iter", sc.lin_max_iter);
  sc.upwind = cfg.get_bool("solver", "upwind", sc.upwind);
  sc.overshoot_tol_u = cfg.get_double("solver", "overshoot_tol_u", sc.overshoot_tol_u);
  sc.overshoot_tol_wth = cfg.get_double("solver", "overshoot_tol_wth", sc.overshoot_tol_wth);
  if (!(sc.newton_tol > 0.0 && sc.newton_tol < 1.0))
    key_error(cfg, "solver", "newton_tol", "must lie in (0, 1)");
  if (cfg.has("solver", "lin_tol") && !(sc.lin_tol > 0.0 && sc.lin_tol < 1.0))
    key_error(cfg, "solver", "lin_tol", "must lie in (0, 1)");
  if (sc.newton_max_iter < 1) key_error(cfg, "solver", "newton_max_iter", "must be at least 1");

  try {
    finalize_scenario(sc);
  } catch (const StepError& e) {
    // a finalize failure is a configuration problem (e.g. tau not dividing t_end)
    throw ConfigError(cfg.source_name() + ": " + e.what());
  }
  return sc;
}

int cmd_run(const Config& cfg, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  std::optional<Scenario> built;
  std::string out_dir;
  int snapshot_every = 0;
  bool ok = usage_phase(
      [&] {
        built.emplace(build_scenario(cfg));
        out_dir = !opt.out_dir.empty() ? opt.out_dir : cfg.get_string("output", "dir", "out");
        snapshot_every = opt.snapshot_every >= 0 ? opt.snapshot_every
                                                 : cfg.get_int("output", "snapshot_every", 0);
        if (snapshot_every < 0) key_error(cfg, "output", "snapshot_every", "must be >= 0");
        consume_section(cfg, "mms"); // not used by this subcommand
        cfg.check_consumed();
      },
      err);
  if (!ok) return kExitUsage;
  const Scenario& sc = *built;

  std::ofstream csv;
  RunSummary summary;
  try {
    std::filesystem::create_directories(out_dir);
    write_mesh(*sc.mesh, out_dir + "/mesh.txt");
    csv.open(out_dir + "/diagnostics.csv");
    if (!csv) throw OutputError("cannot open " + out_dir + "/diagnostics.csv for writing");
    write_diag_header(csv);
    csv.flush();

    RunCallbacks cb;
    cb.on_row = [&](const DiagnosticsRow& row) {
      write_diag_row(row, csv);
      csv.flush(); // keep partial output on later failures
    };
    cb.on_state = [&](int step, const State& s) {
      bool boundary_step = step == 0 || step == sc.steps;
      bool cadence = snapshot_every > 0 && step % snapshot_every == 0;
      if (!boundary_step && !cadence) return;
      char name[32];
      std::snprintf(name, sizeof name, "snap_%06d.vtk", step);
      write_vtk_snapshot(s, *sc.mesh, out_dir + "/" + name);
    };
    summary = run(sc, cb);
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << "\n";
    return kExitRuntime;
  }

  out << "completed " << summary.steps_completed << " steps in " << fmt17(summary.wall_seconds)
      << " s\n";

  bool violated = false;
  if (opt.check != CheckMode::Off) {
    auto report = [&](const char* name, bool pass, const std::string& detail) {
      out << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
      if (!pass) violated = true;
    };
    if (sc.constant_dirichlet()) {
      report("maximum principle u",
             summary.max_overshoot_u <= sc.overshoot_tol_u,
             "max overshoot " + fmt17(summary.max_overshoot_u) + " (tol " +
                 fmt17(sc.overshoot_tol_u) + ")");
      report("maximum principle w/theta",
             summary.max_overshoot_w <= sc.overshoot_tol_wth &&
                 summary.max_overshoot_th <= sc.overshoot_tol_wth,
             "max overshoots " + fmt17(summary.max_overshoot_w) + ", " +
                 fmt17(summary.max_overshoot_th) + " (tol " + fmt17(sc.overshoot_tol_wth) + ")");
    }
    if (summary.energy_applicable) {
      double allowed = -1e-8 * (1.0 + summary.energy0);
      report("energy inequality",
             summary.min_energy_slack >= allowed,
             "min slack " + fmt17(summary.min_energy_slack) + " (allowed " + fmt17(allowed) +
                 ")");
    }
    if (summary.conservation_applicable) {
      double drift = std::max({summary.max_drift_b, summary.max_drift_bw, summary.max_drift_bth});
      report("conservation", drift <= 1e-10,
             "max relative drift " + fmt17(drift) + " (tol 1e-10)");
    }
  }
  if (violated && opt.check == CheckMode::Strict) return kExitAudit;
  return kExitOk;
}

int cmd_mms(const Config& cfg, std::ostream& out, std::ostream& err) {
  std::optional<CoefficientSet> cs;
  std::string case_id;
  std::vector<int> spatial_n;
  double spatial_tau_coef = 1.0;
  int temporal_n = 64;
  std::vector<double> temporal_tau;
  double spatial_order_min = 1.7, temporal_order_min = 0.8;
  double t_end = 0.0;
  std::string out_dir;

  bool ok = usage_phase(
      [&] {
        cs.emplace(coefficients_from_config(cfg));
        t_end = cfg.get_double("time", "t_end");
        if (!(t_end > 0.0))
          throw ConfigError(cfg.source_name() + ": t_end must be positive (line " +
                            std::to_string(cfg.line_of("time", "t_end")) + ")");
        case_id = cfg.get_string("mms", "case", "separable_sin");
        spatial_n = parse_int_list(cfg, "mms", "spatial_n",
                                   cfg.get_string("mms", "spatial_n", "8,16,32"));
        spatial_tau_coef = cfg.get_double("mms", "spatial_tau_coef", 1.0);
        temporal_n = cfg.get_int("mms", "temporal_n", 64);
        temporal_tau = parse_double_list(cfg, "mms", "temporal_tau",
                                         cfg.get_string("mms", "temporal_tau", "0.1,0.05,0.025"));
        spatial_order_min = cfg.get_double("mms", "spatial_order_min", 1.7);
        temporal_order_min = cfg.get_double("mms", "temporal_order_min", 0.8);
        out_dir = cfg.get_string("output", "dir", "out");
        // the remaining scenario sections describe a direct run; ignore them here
        for (const char* s : {"mesh", "boundary", "initial", "solver"}) consume_section(cfg, s);
        cfg.mark_consumed("time", "tau");
        cfg.check_consumed();
      },
      err);
  if (!ok) return kExitUsage;

  RateTable table;
  try {
    ManufacturedCase mc = build_mms_case(case_id, *cs);
    double fd = mms_fd_residual_max(mc, 200, 20260814u, t_end);
    out << "manufactured-source residual (finite differences): " << fmt17(fd) << "\n";
    if (fd > 1e-6) {
      err << "mms failed: manufactured sources disagree with finite differences (" << fmt17(fd)
          << " > 1e-6)\n";
      return kExitRuntime;
    }
    table = convergence_study(mc, spatial_n, spatial_tau_coef, temporal_n, temporal_tau, t_end);

    std::filesystem::create_directories(out_dir);
    std::string csv_path = out_dir + "/mms_rates.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw OutputError("cannot open " + csv_path + " for writing");
    csv << "h,tau,err_u,err_w,err_th\n";
    for (const auto* block : {&table.spatial, &table.temporal})
      for (const StudyCell& c : *block)
        csv << fmt17(c.h) << "," << fmt17(c.tau) << "," << fmt17(c.err_u) << ","
            << fmt17(c.err_w) << "," << fmt17(c.err_th) << "\n";
  } catch (const VerifyError& e) {
    err << "mms failed: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "mms failed: " << e.what() << "\n";
    return kExitRuntime;
  }

  bool pass = true;
  auto gate = [&](const char* name, double got, double min) {
    bool okg = got >= min;
    out << (okg ? "PASS " : "FAIL ") << name << ": observed order " << fmt17(got)
        << " (required >= " << fmt17(min) << ")\n";
    if (!okg) pass = false;
  };
  gate("spatial order u", table.spatial_order_u, spatial_order_min);
  gate("spatial order w", table.spatial_order_w, spatial_order_min);
  gate("spatial order theta", table.spatial_order_th, spatial_order_min);
  gate("temporal order u", table.temporal_order_u, temporal_order_min);
  gate("temporal order w", table.temporal_order_w, temporal_order_min);
  gate("temporal order theta", table.temporal_order_th, temporal_order_min);
  return pass ? kExitOk : kExitAudit;
}

int cmd_oracle(const Config& cfg, std::ostream& out, std::ostream& err) {
  std::optional<Scenario> built;
  bool ok = usage_phase(
      [&] {
        built.emplace(build_scenario(cfg));
        if (built->mesh->node_count() > 12)
          throw ConfigError(cfg.source_name() + ": the oracle check needs a mesh with at most "
                            "12 nodes, got " +
                            std::to_string(built->mesh->node_count()));
        consume_section(cfg, "output");
        consume_section(cfg, "mms");
        cfg.check_consumed();
      },
      err);
  if (!ok) return kExitUsage;

  double dev = 0.0;
  try {
    dev = oracle_step_check(*built);
  } catch (const std::exception& e) {
    err << "oracle check failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  out << "max nodal deviation from dense oracle: " << fmt17(dev) << "\n";
  if (dev <= 1e-8) {
    out << "PASS oracle equivalence\n";
    return kExitOk;
  }
  out << "FAIL oracle equivalence: deviation above 1e-8\n";
  return kExitAudit;
}

int cmd_validate(const Config& cfg, std::ostream& out, std::ostream& err) {
  std::optional<CoefficientSet> cs;
  bool ok = usage_phase(
      [&] {
        cs.emplace(coefficients_from_config(cfg));
        for (const char* s : {"mesh", "time", "boundary", "initial", "solver", "output", "mms"})
          consume_section(cfg, s);
        cfg.check_consumed();
      },
      err);
  if (!ok) return kExitUsage;

  ValidationReport report;
  try {
    report = validate_assumptions(*cs, -50.0, 50.0, 10000);
  } catch (const std::exception& e) {
    err << "validation failed to run: " << e.what() << "\n";
    return kExitRuntime;
  }
  for (const ValidationClause& c : report.clauses)
    out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  out << (report.pass ? "all assumption clauses hold\n" : "assumption violated\n");
  return report.pass ? kExitOk : kExitAudit;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"coupled moisture / solute / heat transport on 2D triangular meshes"};
  app.require_subcommand(1);

  std::string cfg_path;
  RunOptions ropt;
  std::string check_str = "report";

  CLI::App* c_run = app.add_subcommand("run", "advance the coupled system, write CSV + VTK");
  c_run->add_option("config", cfg_path, "configuration file")->required();
  c_run->add_option("--out", ropt.out_dir, "output directory (default from [output] dir)");
  c_run->add_option("--snapshot-every", ropt.snapshot_every,
                    "write a VTK snapshot every N steps (first and last always written)");
  c_run->add_option("--check-invariants", check_str, "off | report | strict")
      ->check(CLI::IsMember({"off", "report", "strict"}));

  CLI::App* c_mms = app.add_subcommand("mms", "manufactured-solution convergence study");
  c_mms->add_option("config", cfg_path, "configuration file")->required();

  CLI::App* c_oracle =
      app.add_subcommand("oracle", "compare one step against the dense oracle solver");
  c_oracle->add_option("config", cfg_path, "configuration file")->required();

  CLI::App* c_validate =
      app.add_subcommand("validate", "check the coefficient set against the model assumptions");
  c_validate->add_option("config", cfg_path, "configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Config cfg;
  try {
    cfg = parse_config(cfg_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  }

  ropt.check = parse_check_mode(check_str);
  if (c_run->parsed()) return cmd_run(cfg, ropt, out, err);
  if (c_mms->parsed()) return cmd_mms(cfg, out, err);
  if (c_oracle->parsed()) return cmd_oracle(cfg, out, err);
  if (c_validate->parsed()) return cmd_validate(cfg, out, err);
  return kExitUsage; // unreachable: require_subcommand(1)
}

} // namespace porous::cli
