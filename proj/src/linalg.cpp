#include "porous/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace porous {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

namespace {

std::vector<double> jacobi_weights(const SparseMatrix& a) {
  std::vector<double> d = a.diagonal();
  for (double& v : d) v = (v != 0.0 && std::isfinite(v)) ? 1.0 / v : 1.0;
  return d;
}

std::vector<double> residual(const SparseMatrix& a, const std::vector<double>& b,
                             const std::vector<double>& x) {
  std::vector<double> r = a.multiply(x);
  for (size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return r;
}

} // namespace

std::pair<std::vector<double>, SolveStats> cg_solve(const SparseMatrix& a,
                                                    const std::vector<double>& b,
                                                    const std::vector<double>& x0,
                                                    double rel_tol, int max_iter) {
  const int n = a.size();
  if (static_cast<int>(b.size()) != n || static_cast<int>(x0.size()) != n)
    throw LinAlgError("cg_solve: vector length mismatch");
  if (max_iter < 0) max_iter = 10 * n;

  std::vector<double> x = x0;
  std::vector<double> r = residual(a, b, x);
  const double r0_norm = norm2(r);
  SolveStats stats;
  if (r0_norm == 0.0) {
    stats.converged = true;
    return {x, stats};
  }
  const double scale = std::max(r0_norm, norm2(b));

  const std::vector<double> w = jacobi_weights(a);
  std::vector<double> z(n), p(n), ap(n);
  for (int i = 0; i < n; ++i) z[i] = w[i] * r[i];
  p = z;
  double rz = dot(r, z);

  auto confirmed = [&]() {
    r = residual(a, b, x);
    stats.final_residual = norm2(r) / scale;
    return stats.final_residual <= rel_tol;
  };

  for (int it = 1; it <= max_iter; ++it) {
    stats.iterations = it;
    a.multiply(p, ap);
    double pap = dot(p, ap);
    if (!(pap > 0.0))
      throw LinAlgError("cg_solve: breakdown (p'Ap = " + std::to_string(pap) +
                        "; matrix not SPD or NaN encountered)");
    double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    if (norm2(r) <= rel_tol * scale) {
      if (confirmed()) {
        stats.converged = true;
        return {x, stats};
      }
      // recursive residual drifted; restart from the true residual
      for (int i = 0; i < n; ++i) z[i] = w[i] * r[i];
      p = z;
      rz = dot(r, z);
      continue;
    }
    for (int i = 0; i < n; ++i) z[i] = w[i] * r[i];
    double rz_new = dot(r, z);
    if (!std::isfinite(rz_new)) throw LinAlgError("cg_solve: NaN breakdown");
    double beta = rz_new / rz;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rz = rz_new;
  }
  stats.converged = confirmed();
  return {x, stats};
}

std::pair<std::vector<double>, SolveStats> bicgstab_solve(const SparseMatrix& a,
                                                          const std::vector<double>& b,
                                                          const std::vector<double>& x0,
                                                          double rel_tol, int max_iter) {
  const int n = a.size();
  if (static_cast<int>(b.size()) != n || static_cast<int>(x0.size()) != n)
    throw LinAlgError("bicgstab_solve: vector length mismatch");
  if (max_iter < 0) max_iter = 10 * n;

  std::vector<double> x = x0;
  std::vector<double> r = residual(a, b, x);
  const double r0_norm = norm2(r);
  SolveStats stats;
  if (r0_norm == 0.0) {
    stats.converged = true;
    return {x, stats};
  }
  const double scale = std::max(r0_norm, norm2(b));

  const std::vector<double> w = jacobi_weights(a);
  std::vector<double> rhat = r;
  std::vector<double> p(n, 0.0), v(n, 0.0), phat(n), s(n), shat(n), t(n);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  bool restarted = false;

  auto confirmed = [&]() {
    r = residual(a, b, x);
    stats.final_residual = norm2(r) / scale;
    return stats.final_residual <= rel_tol;
  };
  auto restart_or_fail = [&](const char* what) {
    if (restarted) throw LinAlgError(std::string("bicgstab_solve: repeated breakdown (") + what +
                                     ")");
    restarted = true;
    r = residual(a, b, x);
    rhat = r;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    rho = alpha = omega = 1.0;
  };

  for (int it = 1; it <= max_iter; ++it) {
    stats.iterations = it;
    double rho_new = dot(rhat, r);
    if (!std::isfinite(rho_new)) throw LinAlgError("bicgstab_solve: NaN breakdown");
    if (std::fabs(rho_new) < 1e-300 || omega == 0.0) {
      restart_or_fail("rho or omega vanished");
      rho_new = dot(rhat, r);
      if (std::fabs(rho_new) < 1e-300) {
        // true residual is (numerically) zero or the shadow residual is
        // degenerate beyond repair
        stats.converged = confirmed();
        return {x, stats};
      }
    }
    double beta = (rho_new / rho) * (alpha / omega);
    for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (int i = 0; i < n; ++i) phat[i] = w[i] * p[i];
    a.multiply(phat, v);
    double rv = dot(rhat, v);
    if (rv == 0.0 || !std::isfinite(rv)) {
      restart_or_fail("rhat'v vanished");
      continue;
    }
    alpha = rho_new / rv;
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm2(s) <= rel_tol * scale) {
      for (int i = 0; i < n; ++i) x[i] += alpha * phat[i];
      if (confirmed()) {
        stats.converged = true;
        return {x, stats};
      }
      rhat = r;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      rho = alpha = omega = 1.0;
      continue;
    }
    for (int i = 0; i < n; ++i) shat[i] = w[i] * s[i];
    a.multiply(shat, t);
    double tt = dot(t, t);
    if (tt == 0.0 || !std::isfinite(tt)) {
      restart_or_fail("t't vanished");
      continue;
    }
    omega = dot(t, s) / tt;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * phat[i] + omega * shat[i];
      r[i] = s[i] - omega * t[i];
    }
    rho = rho_new;
    if (norm2(r) <= rel_tol * scale) {
      if (confirmed()) {
        stats.converged = true;
        return {x, stats};
      }
      rhat = r;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      rho = alpha = omega = 1.0;
    }
  }
  stats.converged = confirmed();
  return {x, stats};
}

std::vector<double> dense_lu_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const int n = static_cast<int>(a.size());
  if (n > 2000) throw LinAlgError("dense_lu_solve: dimension exceeds the 2000 oracle guard");
  if (static_cast<int>(b.size()) != n) throw LinAlgError("dense_lu_solve: length mismatch");
  for (const auto& row : a)
    if (static_cast<int>(row.size()) != n) throw LinAlgError("dense_lu_solve: ragged matrix");

  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(a[i][k]) > std::fabs(a[piv][k])) piv = i;
    if (a[piv][k] == 0.0)
      throw LinAlgError("dense_lu_solve: singular matrix (zero pivot column at step " +
                        std::to_string(k) + ")");
    if (piv != k) {
      std::swap(a[piv], a[k]);
      std::swap(b[piv], b[k]);
    }
    for (int i = k + 1; i < n; ++i) {
      double f = a[i][k] / a[k][k];
      if (f == 0.0) continue;
      for (int j = k + 1; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

} // namespace porous
