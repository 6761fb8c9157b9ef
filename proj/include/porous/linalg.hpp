#pragma once

#include "porous/sparse.hpp"

#include <utility>
#include <vector>

namespace porous {

struct SolveStats {
  int iterations = 0;
  // ||b - A x|| / max(||b - A x0||, ||b||), recomputed from scratch before
  // reporting convergence (never the recursively updated residual). The
  // ||b|| floor keeps warm starts honest: an x0 that is already nearly the
  // solution must not tighten the target below what doubles can reach.
  double final_residual = 0.0;
  bool converged = false;
};

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);
double norm_inf(const std::vector<double>& a);

/// Jacobi-preconditioned conjugate gradients for SPD systems. rel_tol is the
/// reduction of ||b - A x|| relative to the initial residual; max_iter < 0
/// means 10 n. Convergence is confirmed against an explicitly recomputed
/// residual before returning. NaN/non-SPD breakdown throws.
std::pair<std::vector<double>, SolveStats> cg_solve(const SparseMatrix& A,
                                                    const std::vector<double>& b,
                                                    const std::vector<double>& x0,
                                                    double rel_tol = 1e-10, int max_iter = -1);

/// Jacobi-preconditioned BiCGStab for nonsymmetric systems. On rho/omega
/// breakdown the iteration restarts once from the current iterate, then
/// throws.
std::pair<std::vector<double>, SolveStats> bicgstab_solve(const SparseMatrix& A,
                                                          const std::vector<double>& b,
                                                          const std::vector<double>& x0,
                                                          double rel_tol = 1e-10,
                                                          int max_iter = -1);

/// Partial-pivot LU oracle for the verification suite. Guard: n <= 2000.
std::vector<double> dense_lu_solve(std::vector<std::vector<double>> a, std::vector<double> b);

} // namespace porous
