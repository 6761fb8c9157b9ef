#pragma once

#include "porous/diagnostics.hpp"
#include "porous/mesh.hpp"
#include "porous/stepper.hpp"

#include <iosfwd>
#include <string>

namespace porous {

struct OutputError : std::runtime_error {
  explicit OutputError(const std::string& what) : std::runtime_error(what) {}
};

/// VTK legacy ASCII snapshot (UNSTRUCTURED_GRID; point scalars u, w, theta).
/// Floats are printed with 17 significant digits so reruns are byte-stable.
void write_vtk_snapshot(const State& state, const Mesh& mesh, const std::string& path);

extern const char* const kDiagCsvHeader;

std::string diag_csv_line(const DiagnosticsRow& row);

void write_diag_header(std::ostream& out);
void write_diag_row(const DiagnosticsRow& row, std::ostream& out);

} // namespace porous
