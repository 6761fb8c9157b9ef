#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "porous/mesh.hpp"
#include "porous/output.hpp"
#include "porous/stepper.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace porous;

namespace {

Mesh two_triangle_square() {
  return parse_mesh_text("nodes 4 triangles 2 bedges 4\n"
                         "0 0\n1 0\n1 1\n0 1\n"
                         "0 1 2\n0 2 3\n"
                         "0 1 N\n1 2 N\n2 3 N\n3 0 D\n",
                         "twotri");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("the diagnostics CSV header is frozen") {
  CHECK(std::string(kDiagCsvHeader) ==
        "step,t,min_u,max_u,min_w,max_w,min_th,max_th,energy_B,dissipation_cum,mass_b,mass_bw,"
        "mass_bth,overshoot_u,overshoot_w,overshoot_th,newton_iters,lin_iters_u,lin_iters_w,"
        "lin_iters_th");
  std::ostringstream out;
  write_diag_header(out);
  CHECK(out.str() == std::string(kDiagCsvHeader) + "\n");
}

TEST_CASE("CSV rows round-trip every double bit-exactly") {
  DiagnosticsRow r;
  r.step = 3;
  r.t = 0.1;
  r.min_u = -0.5;
  r.max_u = 1.0 / 3.0;
  r.min_w = 0.0;
  r.max_w = 1e-300;
  r.min_th = -2.5e17;
  r.max_th = 0.30000000000000004; // 0.1 + 0.2 != 0.3
  r.energy_B = 6.02214076e23;
  r.dissipation_cum = 1.0;
  r.mass_b = 0.225;
  r.mass_bw = -7.0;
  r.mass_bth = 3.0e-9;
  r.overshoot_u = 0.0;
  r.overshoot_w = 1.25e-11;
  r.overshoot_th = 2.0;
  r.newton_iters = 4;
  r.lin_iters_u = 17;
  r.lin_iters_w = 0;
  r.lin_iters_th = 123;

  std::string line = diag_csv_line(r);
  std::vector<std::string> fields = split_csv(line);
  std::vector<std::string> header = split_csv(kDiagCsvHeader);
  REQUIRE(fields.size() == header.size());
  REQUIRE(fields.size() == 20);

  CHECK(fields[0] == "3");
  // %.17g is the shortest format guaranteed to reproduce any double exactly
  CHECK(fields[1] == "0.10000000000000001");
  CHECK(fields[2] == "-0.5");
  CHECK(fields[3] == "0.33333333333333331");
  CHECK(fields[16] == "4");
  CHECK(fields[17] == "17");
  CHECK(fields[18] == "0");
  CHECK(fields[19] == "123");

  const double originals[15] = {r.t,      r.min_u,  r.max_u,           r.min_w,
                                r.max_w,  r.min_th, r.max_th,          r.energy_B,
                                r.dissipation_cum,  r.mass_b,          r.mass_bw,
                                r.mass_bth,         r.overshoot_u,     r.overshoot_w,
                                r.overshoot_th};
  for (int i = 0; i < 15; ++i) {
    double parsed = std::strtod(fields[i + 1].c_str(), nullptr);
    CHECK(parsed == originals[i]);
  }

  // The same row always serializes to the same bytes.
  CHECK(diag_csv_line(r) == line);
  std::ostringstream out;
  write_diag_row(r, out);
  CHECK(out.str() == line + "\n");
}

TEST_CASE("VTK snapshot of the two-triangle mesh matches the golden bytes") {
  Mesh mesh = two_triangle_square();
  State s;
  s.t = 0.25;
  s.u = {0.0, 0.5, 1.0, -0.25};
  s.w = {0.125, 2.0, -3.5, 0.75};
  s.theta = {1.5, -0.0625, 0.0, 42.0};

  std::string path = temp_path("snapshot_golden_test.vtk");
  write_vtk_snapshot(s, mesh, path);
  std::string got = slurp(path);
  std::remove(path.c_str());

  const std::string expected = "# vtk DataFile Version 3.0\n"
                               "porous transport snapshot t=0.25\n"
                               "ASCII\n"
                               "DATASET UNSTRUCTURED_GRID\n"
                               "POINTS 4 double\n"
                               "0 0 0\n"
                               "1 0 0\n"
                               "1 1 0\n"
                               "0 1 0\n"
                               "CELLS 2 8\n"
                               "3 0 1 2\n"
                               "3 0 2 3\n"
                               "CELL_TYPES 2\n"
                               "5\n"
                               "5\n"
                               "POINT_DATA 4\n"
                               "SCALARS u double 1\n"
                               "LOOKUP_TABLE default\n"
                               "0\n"
                               "0.5\n"
                               "1\n"
                               "-0.25\n"
                               "SCALARS w double 1\n"
                               "LOOKUP_TABLE default\n"
                               "0.125\n"
                               "2\n"
                               "-3.5\n"
                               "0.75\n"
                               "SCALARS theta double 1\n"
                               "LOOKUP_TABLE default\n"
                               "1.5\n"
                               "-0.0625\n"
                               "0\n"
                               "42\n";
  CHECK(got == expected);
}

TEST_CASE("VTK snapshots re-read to the exact nodal values") {
  Mesh mesh = generate_rect_mesh(8, 8, 1.0, 1.0, {});
  const int n = mesh.node_count();
  State s;
  s.t = 0.3;
  s.u.resize(n);
  s.w.resize(n);
  s.theta.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = mesh.nodes[i][0], y = mesh.nodes[i][1];
    s.u[i] = -2.0 + 1.2 * x + 0.1 * y;
    s.w[i] = 0.25 + 0.5 * x * y;
    s.theta[i] = 0.1 * (x - y);
  }

  std::string path = temp_path("snapshot_reread_test.vtk");
  write_vtk_snapshot(s, mesh, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string tok;
  int points = 0, cells = 0, cell_entries = 0;
  while (in >> tok && tok != "POINTS") {
  }
  in >> points;
  CHECK(points == n);
  while (in >> tok && tok != "CELLS") {
  }
  in >> cells >> cell_entries;
  CHECK(cells == mesh.triangle_count());
  CHECK(cell_entries == 4 * mesh.triangle_count());

  auto read_block = [&](const char* name) {
    while (in >> tok) {
      if (tok == "SCALARS") {
        in >> tok;
        if (tok == name) break;
      }
    }
    REQUIRE(in.good());
    in >> tok >> tok;        // "double 1"
    in >> tok >> tok;        // "LOOKUP_TABLE default"
    std::vector<double> out(n);
    for (double& v : out) in >> v;
    REQUIRE(in.good());
    return out;
  };
  CHECK(read_block("u") == s.u);
  CHECK(read_block("w") == s.w);
  CHECK(read_block("theta") == s.theta);
  in.close();

  // Byte-level determinism across reruns.
  std::string again = temp_path("snapshot_reread_test2.vtk");
  write_vtk_snapshot(s, mesh, again);
  CHECK(slurp(path) == slurp(again));
  std::remove(path.c_str());
  std::remove(again.c_str());
}

TEST_CASE("an unwritable snapshot path names the file in the error") {
  Mesh mesh = two_triangle_square();
  State s;
  s.u.assign(4, 0.0);
  s.w.assign(4, 0.0);
  s.theta.assign(4, 0.0);
  CHECK_THROWS_WITH_AS(write_vtk_snapshot(s, mesh, "/nonexistent_dir_px/out.vtk"),
                       doctest::Contains("/nonexistent_dir_px/out.vtk"), OutputError);
  CHECK_THROWS_WITH_AS(write_vtk_snapshot(s, mesh, "/nonexistent_dir_px/out.vtk"),
                       doctest::Contains("cannot open"), OutputError);
}
