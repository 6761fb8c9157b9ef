#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace porous {

struct MeshError : std::runtime_error {
  explicit MeshError(const std::string& what) : std::runtime_error(what) {}
};

enum class EdgeMarker { Dirichlet, Neumann };

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  EdgeMarker marker = EdgeMarker::Neumann;
};

/// Extra structure retained for meshes produced by generate_rect_mesh;
/// enables O(1) point location for interpolation between refinement levels.
struct RectInfo {
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;
};

/// Per-side boundary classification for generated rectangle meshes.
struct SideMarkers {
  EdgeMarker left = EdgeMarker::Dirichlet;
  EdgeMarker right = EdgeMarker::Neumann;
  EdgeMarker bottom = EdgeMarker::Neumann;
  EdgeMarker top = EdgeMarker::Neumann;
};

/// Conforming triangulation of a polygonal domain with the boundary split
/// into Dirichlet and Neumann parts. Immutable after construction; safe for
/// shared read-only access.
struct Mesh {
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<int, 3>> triangles; // CCW
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<int> dirichlet_nodes; // sorted, unique; endpoints of Dirichlet edges
  std::optional<RectInfo> rect;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
};

struct TriGeometry {
  double area = 0.0;
  std::array<std::array<double, 2>, 3> grad{}; // constant P1 basis gradients
};

/// Structured right-triangle mesh of [0,lx] x [0,ly]; every cell is split
/// along the same diagonal (lower-left to upper-right), which keeps the
/// constant-coefficient stiffness matrix an M-matrix.
Mesh generate_rect_mesh(int nx, int ny, double lx, double ly, const SideMarkers& markers);

/// Parses the line-oriented ASCII format:
///   nodes N  triangles T  bedges B
///   N lines "x y", T lines "i j k" (0-based, CCW), B lines "i j M" (M = D|N).
/// Lines starting with '#' are ignored. The result is fully validated.
Mesh read_mesh(const std::string& path);
Mesh parse_mesh_text(const std::string& text, const std::string& origin);
void write_mesh(const Mesh& mesh, const std::string& path);

/// Structural checks: positive triangle areas, edge incidence (interior
/// edges in exactly two triangles, boundary edges in one and declared),
/// in-range indices. Throws MeshError naming the defect.
void validate_mesh(const Mesh& mesh);

TriGeometry triangle_geometry(const Mesh& mesh, int tri_index);

/// Union of the endpoints of Dirichlet-marked edges (a corner shared by a
/// Dirichlet and a Neumann edge counts as Dirichlet).
std::vector<int> compute_dirichlet_nodes(const std::vector<BoundaryEdge>& edges);

/// Evaluates the P1 interpolant of nodal values at (x, y). O(1) on meshes
/// carrying RectInfo, linear scan otherwise. Points outside the domain are
/// clamped onto it (used only for same-domain transfer between levels).
double eval_p1(const Mesh& mesh, const std::vector<double>& nodal, double x, double y);

} // namespace porous
