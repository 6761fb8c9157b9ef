#include "porous/assembly.hpp"

#include <cmath>

namespace porous {

namespace {

void check_nodal(const Mesh& mesh, const NodalField& field, const std::string& name) {
  if (static_cast<int>(field.size()) != mesh.node_count())
    throw AssemblyError(name + ": field length does not match node count");
  for (size_t i = 0; i < field.size(); ++i)
    if (!std::isfinite(field[i]))
      throw AssemblyError(name + ": non-finite value at node " + std::to_string(i));
}

void check_positive_coeff(const Mesh& mesh, const NodalField& coeff, const std::string& name) {
  check_nodal(mesh, coeff, name);
  for (size_t i = 0; i < coeff.size(); ++i)
    if (!(coeff[i] > 0.0))
      throw AssemblyError(name + ": nonpositive coefficient at node " + std::to_string(i) +
                          " (assumption (ii) requires strictly positive coefficients)");
}

} // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh, const NodalField& coeff) {
  check_positive_coeff(mesh, coeff, "assemble_stiffness");
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(mesh.triangle_count()) * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    TriGeometry g = triangle_geometry(mesh, t);
    double c_t = (coeff[tri[0]] + coeff[tri[1]] + coeff[tri[2]]) / 3.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double dot = g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1];
        trip.push_back({tri[i], tri[j], c_t * dot * g.area});
      }
    }
  }
  return SparseMatrix::from_triplets(mesh.node_count(), std::move(trip));
}

NodalField assemble_lumped_mass(const Mesh& mesh, const NodalField& weight) {
  check_nodal(mesh, weight, "assemble_lumped_mass");
  NodalField m(mesh.node_count(), 0.0);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    double third = triangle_geometry(mesh, t).area / 3.0;
    for (int v : tri) m[v] += third;
  }
  for (int i = 0; i < mesh.node_count(); ++i) m[i] *= weight[i];
  return m;
}

SparseMatrix assemble_convection(const Mesh& mesh, const NodalField& a_coeff, const NodalField& u,
                                 bool upwind) {
  check_positive_coeff(mesh, a_coeff, "assemble_convection");
  check_nodal(mesh, u, "assemble_convection(u)");
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(mesh.triangle_count()) * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    TriGeometry g = triangle_geometry(mesh, t);
    double a_t = (a_coeff[tri[0]] + a_coeff[tri[1]] + a_coeff[tri[2]]) / 3.0;
    double gux = 0.0, guy = 0.0;
    for (int k = 0; k < 3; ++k) {
      gux += u[tri[k]] * g.grad[k][0];
      guy += u[tri[k]] * g.grad[k][1];
    }
    if (gux == 0.0 && guy == 0.0) continue;
    int up = 0; // the advecting flux -a grad(u) points from high u to low u
    if (u[tri[1]] > u[tri[up]]) up = 1;
    if (u[tri[2]] > u[tri[up]]) up = 2;
    for (int i = 0; i < 3; ++i) {
      double flux = a_t * (gux * g.grad[i][0] + guy * g.grad[i][1]) * g.area;
      if (upwind) {
        trip.push_back({tri[i], tri[up], flux});
      } else {
        for (int j = 0; j < 3; ++j) trip.push_back({tri[i], tri[j], flux / 3.0});
      }
    }
  }
  return SparseMatrix::from_triplets(mesh.node_count(), std::move(trip));
}

} // namespace porous
