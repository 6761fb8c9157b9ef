#include "porous/output.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace porous {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_scalar_block(std::ostream& out, const char* name, const NodalField& field) {
  out << "SCALARS " << name << " double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (double v : field) out << fmt17(v) << "\n";
}

} // namespace

const char* const kDiagCsvHeader =
    "step,t,min_u,max_u,min_w,max_w,min_th,max_th,energy_B,dissipation_cum,mass_b,mass_bw,"
    "mass_bth,overshoot_u,overshoot_w,overshoot_th,newton_iters,lin_iters_u,lin_iters_w,"
    "lin_iters_th";

void write_vtk_snapshot(const State& state, const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw OutputError("cannot open '" + path + "' for writing");
  out << "# vtk DataFile Version 3.0\n";
  out << "porous transport snapshot t=" << fmt17(state.t) << "\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.node_count() << " double\n";
  for (const auto& p : mesh.nodes) out << fmt17(p[0]) << " " << fmt17(p[1]) << " 0\n";
  out << "CELLS " << mesh.triangle_count() << " " << 4 * mesh.triangle_count() << "\n";
  for (const auto& tri : mesh.triangles)
    out << "3 " << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
  out << "CELL_TYPES " << mesh.triangle_count() << "\n";
  for (int t = 0; t < mesh.triangle_count(); ++t) out << "5\n";
  out << "POINT_DATA " << mesh.node_count() << "\n";
  write_scalar_block(out, "u", state.u);
  write_scalar_block(out, "w", state.w);
  write_scalar_block(out, "theta", state.theta);
  if (!out) throw OutputError("write to '" + path + "' failed");
}

std::string diag_csv_line(const DiagnosticsRow& r) {
  std::string line = std::to_string(r.step);
  for (double v : {r.t, r.min_u, r.max_u, r.min_w, r.max_w, r.min_th, r.max_th, r.energy_B,
                   r.dissipation_cum, r.mass_b, r.mass_bw, r.mass_bth, r.overshoot_u,
                   r.overshoot_w, r.overshoot_th})
    line += "," + fmt17(v);
  for (int v : {r.newton_iters, r.lin_iters_u, r.lin_iters_w, r.lin_iters_th})
    line += "," + std::to_string(v);
  return line;
}

void write_diag_header(std::ostream& out) { out << kDiagCsvHeader << "\n"; }

void write_diag_row(const DiagnosticsRow& row, std::ostream& out) {
  out << diag_csv_line(row) << "\n";
}

} // namespace porous
