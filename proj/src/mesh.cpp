#include "porous/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace porous {

namespace {

double signed_area2(const Mesh& mesh, const std::array<int, 3>& tri) {
  const auto& p0 = mesh.nodes[tri[0]];
  const auto& p1 = mesh.nodes[tri[1]];
  const auto& p2 = mesh.nodes[tri[2]];
  return (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
}

std::pair<int, int> undirected(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

} // namespace

Mesh generate_rect_mesh(int nx, int ny, double lx, double ly, const SideMarkers& markers) {
  if (nx < 1 || ny < 1) throw MeshError("generate_rect_mesh needs nx, ny >= 1");
  if (!(lx > 0.0) || !(ly > 0.0)) throw MeshError("generate_rect_mesh needs lx, ly > 0");

  Mesh mesh;
  mesh.nodes.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh.nodes.push_back({lx * i / nx, ly * j / ny});
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  mesh.triangles.reserve(static_cast<size_t>(2) * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  // Boundary traversed CCW so the domain lies to the left of each edge.
  for (int i = 0; i < nx; ++i)
    mesh.boundary_edges.push_back({id(i, 0), id(i + 1, 0), markers.bottom});
  for (int j = 0; j < ny; ++j)
    mesh.boundary_edges.push_back({id(nx, j), id(nx, j + 1), markers.right});
  for (int i = nx; i > 0; --i)
    mesh.boundary_edges.push_back({id(i, ny), id(i - 1, ny), markers.top});
  for (int j = ny; j > 0; --j)
    mesh.boundary_edges.push_back({id(0, j), id(0, j - 1), markers.left});

  mesh.dirichlet_nodes = compute_dirichlet_nodes(mesh.boundary_edges);
  mesh.rect = RectInfo{nx, ny, lx, ly};
  return mesh;
}

Mesh parse_mesh_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw MeshError(origin + ": empty mesh file");

  std::istringstream head(rows[0]);
  std::string kn, kt, kb;
  long n = -1, t = -1, b = -1;
  head >> kn >> n >> kt >> t >> kb >> b;
  if (head.fail() || kn != "nodes" || kt != "triangles" || kb != "bedges" || n < 0 || t < 0 ||
      b < 0)
    throw MeshError(origin + ": malformed header '" + rows[0] + "'");
  if (static_cast<long>(rows.size()) != 1 + n + t + b)
    throw MeshError(origin + ": expected " + std::to_string(1 + n + t + b) + " data lines, got " +
                    std::to_string(rows.size()));

  Mesh mesh;
  size_t r = 1;
  for (long i = 0; i < n; ++i, ++r) {
    std::istringstream row(rows[r]);
    double x, y;
    row >> x >> y;
    if (row.fail()) throw MeshError(origin + ": malformed node line '" + rows[r] + "'");
    mesh.nodes.push_back({x, y});
  }
  for (long i = 0; i < t; ++i, ++r) {
    std::istringstream row(rows[r]);
    long a, bb, c;
    row >> a >> bb >> c;
    if (row.fail()) throw MeshError(origin + ": malformed triangle line '" + rows[r] + "'");
    for (long v : {a, bb, c})
      if (v < 0 || v >= n)
        throw MeshError(origin + ": triangle " + std::to_string(i) + ": node index " +
                        std::to_string(v) + " out of range (have " + std::to_string(n) +
                        " nodes)");
    mesh.triangles.push_back(
        {static_cast<int>(a), static_cast<int>(bb), static_cast<int>(c)});
  }
  for (long i = 0; i < b; ++i, ++r) {
    std::istringstream row(rows[r]);
    long a, bb;
    std::string m;
    row >> a >> bb >> m;
    if (row.fail()) throw MeshError(origin + ": malformed boundary-edge line '" + rows[r] + "'");
    for (long v : {a, bb})
      if (v < 0 || v >= n)
        throw MeshError(origin + ": boundary edge " + std::to_string(i) + ": node index " +
                        std::to_string(v) + " out of range");
    EdgeMarker marker;
    if (m == "D")
      marker = EdgeMarker::Dirichlet;
    else if (m == "N")
      marker = EdgeMarker::Neumann;
    else
      throw MeshError(origin + ": unknown marker letter '" + m + "' (expected D or N)");
    mesh.boundary_edges.push_back({static_cast<int>(a), static_cast<int>(bb), marker});
  }

  mesh.dirichlet_nodes = compute_dirichlet_nodes(mesh.boundary_edges);
  validate_mesh(mesh);
  return mesh;
}

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mesh_text(buf.str(), path);
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open '" + path + "' for writing");
  out << "nodes " << mesh.node_count() << "  triangles " << mesh.triangle_count() << "  bedges "
      << mesh.boundary_edges.size() << "\n";
  char buf[64];
  for (const auto& p : mesh.nodes) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p[0], p[1]);
    out << buf;
  }
  for (const auto& tri : mesh.triangles) out << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
  for (const auto& e : mesh.boundary_edges)
    out << e.a << " " << e.b << " " << (e.marker == EdgeMarker::Dirichlet ? "D" : "N") << "\n";
  if (!out) throw MeshError("write to '" + path + "' failed");
}

void validate_mesh(const Mesh& mesh) {
  const int n = mesh.node_count();
  if (n < 3 || mesh.triangles.empty()) throw MeshError("mesh needs at least one triangle");

  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int v : tri)
      if (v < 0 || v >= n)
        throw MeshError("triangle " + std::to_string(t) + ": node index out of range");
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw MeshError("triangle " + std::to_string(t) + ": repeated vertex");
    if (!(signed_area2(mesh, tri) > 0.0))
      throw MeshError("triangle " + std::to_string(t) +
                      ": nonpositive area (vertices must be counter-clockwise)");
  }

  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) ++edge_count[undirected(tri[e], tri[(e + 1) % 3])];
  }
  for (const auto& [edge, count] : edge_count) {
    if (count > 2)
      throw MeshError("edge (" + std::to_string(edge.first) + ", " + std::to_string(edge.second) +
                      ") belongs to " + std::to_string(count) +
                      " triangles (duplicate or overlapping triangles)");
  }

  std::map<std::pair<int, int>, int> declared;
  for (const auto& be : mesh.boundary_edges) {
    if (be.a == be.b) throw MeshError("boundary edge with equal endpoints");
    if (++declared[undirected(be.a, be.b)] > 1)
      throw MeshError("boundary edge (" + std::to_string(be.a) + ", " + std::to_string(be.b) +
                      ") declared more than once");
  }
  for (const auto& [edge, count] : edge_count) {
    bool listed = declared.count(edge) > 0;
    if (count == 1 && !listed)
      throw MeshError("edge (" + std::to_string(edge.first) + ", " + std::to_string(edge.second) +
                      ") lies on the mesh boundary but is not declared (hole or missing "
                      "boundary edge)");
    if (count == 2 && listed)
      throw MeshError("declared boundary edge (" + std::to_string(edge.first) + ", " +
                      std::to_string(edge.second) + ") is interior to the mesh");
  }
  for (const auto& [edge, count] : declared) {
    (void)count;
    if (edge_count.count(edge) == 0)
      throw MeshError("declared boundary edge (" + std::to_string(edge.first) + ", " +
                      std::to_string(edge.second) + ") is not an edge of any triangle");
  }

  std::vector<char> touched(n, 0);
  for (const auto& tri : mesh.triangles)
    for (int v : tri) touched[v] = 1;
  for (int i = 0; i < n; ++i)
    if (!touched[i]) throw MeshError("node " + std::to_string(i) + " belongs to no triangle");
}

TriGeometry triangle_geometry(const Mesh& mesh, int tri_index) {
  const auto& tri = mesh.triangles.at(tri_index);
  const auto& p0 = mesh.nodes[tri[0]];
  const auto& p1 = mesh.nodes[tri[1]];
  const auto& p2 = mesh.nodes[tri[2]];
  double two_a = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
  TriGeometry g;
  g.area = 0.5 * two_a;
  g.grad[0] = {(p1[1] - p2[1]) / two_a, (p2[0] - p1[0]) / two_a};
  g.grad[1] = {(p2[1] - p0[1]) / two_a, (p0[0] - p2[0]) / two_a};
  g.grad[2] = {(p0[1] - p1[1]) / two_a, (p1[0] - p0[0]) / two_a};
  return g;
}

std::vector<int> compute_dirichlet_nodes(const std::vector<BoundaryEdge>& edges) {
  std::vector<int> out;
  for (const auto& e : edges) {
    if (e.marker == EdgeMarker::Dirichlet) {
      out.push_back(e.a);
      out.push_back(e.b);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double eval_p1(const Mesh& mesh, const std::vector<double>& nodal, double x, double y) {
  if (nodal.size() != mesh.nodes.size())
    throw MeshError("eval_p1: field length does not match node count");

  auto eval_on = [&](int t) {
    const auto& tri = mesh.triangles[t];
    TriGeometry g = triangle_geometry(mesh, t);
    const auto& p0 = mesh.nodes[tri[0]];
    double v = 0.0;
    for (int k = 0; k < 3; ++k) {
      // barycentric value of phi_k at (x,y) via its affine representation
      double phi = (k == 0 ? 1.0 : 0.0) + g.grad[k][0] * (x - p0[0]) + g.grad[k][1] * (y - p0[1]);
      v += nodal[tri[k]] * phi;
    }
    return v;
  };

  if (mesh.rect) {
    const RectInfo& r = *mesh.rect;
    double hx = r.lx / r.nx, hy = r.ly / r.ny;
    double cx = std::clamp(x, 0.0, r.lx), cy = std::clamp(y, 0.0, r.ly);
    int i = std::min(static_cast<int>(cx / hx), r.nx - 1);
    int j = std::min(static_cast<int>(cy / hy), r.ny - 1);
    // cells are split along the lower-left -> upper-right diagonal
    double fx = cx / hx - i, fy = cy / hy - j;
    int cell = 2 * (j * r.nx + i);
    int t = (fy <= fx) ? cell : cell + 1;
    return eval_on(t);
  }

  // generic fallback: first triangle containing the point (tolerant test)
  int best = 0;
  double best_violation = std::numeric_limits<double>::max();
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    TriGeometry g = triangle_geometry(mesh, t);
    const auto& p0 = mesh.nodes[tri[0]];
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
      double phi = (k == 0 ? 1.0 : 0.0) + g.grad[k][0] * (x - p0[0]) + g.grad[k][1] * (y - p0[1]);
      worst = std::max(worst, -phi);
    }
    if (worst <= 1e-12) return eval_on(t);
    if (worst < best_violation) {
      best_violation = worst;
      best = t;
    }
  }
  return eval_on(best);
}

} // namespace porous
