#pragma once

#include "porous/mesh.hpp"
#include "porous/sparse.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace porous {

struct AssemblyError : std::runtime_error {
  explicit AssemblyError(const std::string& what) : std::runtime_error(what) {}
};

using NodalField = std::vector<double>;

/// K_ij = sum_T c_T int_T grad(phi_j) . grad(phi_i), with c_T the arithmetic
/// mean of the three vertex values of `coeff`. Symmetric, zero row sums,
/// positive semidefinite. Nonpositive coefficient entries are an error (they
/// signal a violated ellipticity assumption) and name the offending node.
SparseMatrix assemble_stiffness(const Mesh& mesh, const NodalField& coeff);

/// Lumped mass: M_i = weight_i * (sum of areas of triangles touching i) / 3.
NodalField assemble_lumped_mass(const Mesh& mesh, const NodalField& weight);

/// Convection matrix of the solute/heat transport term, gradient on the TEST
/// function: C_ij = sum_T a_T (grad u_h . grad phi_i) |T|/3 for each vertex j
/// of T. With `upwind` the element contribution goes entirely to the
/// upstream vertex (largest nodal u on T) instead of being split equally;
/// either way C . 1 = K(a) u.
SparseMatrix assemble_convection(const Mesh& mesh, const NodalField& a_coeff, const NodalField& u,
                                 bool upwind = false);

} // namespace porous
