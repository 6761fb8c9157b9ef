#include "porous/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace porous {

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<Triplet> entries) {
  if (n < 0) throw LinAlgError("matrix dimension must be nonnegative");
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      throw LinAlgError("triplet index out of range");
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m;
  m.n_ = n;
  m.row_ptr_.assign(n + 1, 0);
  size_t i = 0;
  while (i < entries.size()) {
    size_t j = i;
    double sum = 0.0;
    while (j < entries.size() && entries[j].row == entries[i].row &&
           entries[j].col == entries[i].col) {
      sum += entries[j].value;
      ++j;
    }
    m.col_ind_.push_back(entries[i].col);
    m.values_.push_back(sum);
    ++m.row_ptr_[entries[i].row + 1];
    i = j;
  }
  for (int r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  return from_diagonal(std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::from_diagonal(const std::vector<double>& diag) {
  std::vector<Triplet> t;
  t.reserve(diag.size());
  for (size_t i = 0; i < diag.size(); ++i)
    t.push_back({static_cast<int>(i), static_cast<int>(i), diag[i]});
  return from_triplets(static_cast<int>(diag.size()), std::move(t));
}

void SparseMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  if (static_cast<int>(x.size()) != n_)
    throw LinAlgError("multiply: vector length mismatch");
  y.assign(n_, 0.0);
  for (int r = 0; r < n_; ++r) {
    double acc = 0.0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[col_ind_[k]];
    y[r] = acc;
  }
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
  std::vector<double> y;
  multiply(x, y);
  return y;
}

double SparseMatrix::coeff(int i, int j) const {
  if (i < 0 || i >= n_ || j < 0 || j >= n_) throw LinAlgError("coeff: index out of range");
  auto begin = col_ind_.begin() + row_ptr_[i];
  auto end = col_ind_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[it - col_ind_.begin()];
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(n_);
  for (int i = 0; i < n_; ++i) d[i] = coeff(i, i);
  return d;
}

void SparseMatrix::add_scaled(const SparseMatrix& other, double alpha) {
  if (other.n_ != n_) throw LinAlgError("add_scaled: dimension mismatch");
  std::vector<int> new_ptr(n_ + 1, 0);
  std::vector<int> new_col;
  std::vector<double> new_val;
  new_col.reserve(values_.size() + other.values_.size());
  new_val.reserve(values_.size() + other.values_.size());
  for (int r = 0; r < n_; ++r) {
    int a = row_ptr_[r], a_end = row_ptr_[r + 1];
    int b = other.row_ptr_[r], b_end = other.row_ptr_[r + 1];
    while (a < a_end || b < b_end) {
      int ca = a < a_end ? col_ind_[a] : n_;
      int cb = b < b_end ? other.col_ind_[b] : n_;
      if (ca < cb) {
        new_col.push_back(ca);
        new_val.push_back(values_[a++]);
      } else if (cb < ca) {
        new_col.push_back(cb);
        new_val.push_back(alpha * other.values_[b++]);
      } else {
        new_col.push_back(ca);
        new_val.push_back(values_[a++] + alpha * other.values_[b++]);
      }
    }
    new_ptr[r + 1] = static_cast<int>(new_col.size());
  }
  row_ptr_ = std::move(new_ptr);
  col_ind_ = std::move(new_col);
  values_ = std::move(new_val);
}

void SparseMatrix::add_diagonal(const std::vector<double>& d) {
  if (static_cast<int>(d.size()) != n_) throw LinAlgError("add_diagonal: dimension mismatch");
  add_scaled(from_diagonal(d), 1.0);
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
  std::vector<std::vector<double>> dense(n_, std::vector<double>(n_, 0.0));
  for (int r = 0; r < n_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) dense[r][col_ind_[k]] = values_[k];
  return dense;
}

void apply_dirichlet(SparseMatrix& matrix, std::vector<double>& rhs,
                     const std::vector<int>& nodes, const std::vector<double>& values,
                     const std::vector<int>& allowed) {
  const int n = matrix.size();
  if (static_cast<int>(rhs.size()) != n || static_cast<int>(values.size()) != n)
    throw LinAlgError("apply_dirichlet: vector length mismatch");
  std::vector<char> constrained(n, 0);
  for (int node : nodes) {
    if (node < 0 || node >= n) throw LinAlgError("apply_dirichlet: node index out of range");
    if (!std::binary_search(allowed.begin(), allowed.end(), node))
      throw LinAlgError("node " + std::to_string(node) + " is not marked Dirichlet");
    constrained[node] = 1;
  }
  if (nodes.empty()) return;

  const auto& ptr = matrix.row_ptr();
  const auto& col = matrix.col_ind();
  auto& val = matrix.values();
  for (int r = 0; r < n; ++r) {
    if (constrained[r]) {
      bool has_diag = false;
      for (int k = ptr[r]; k < ptr[r + 1]; ++k) {
        val[k] = (col[k] == r) ? 1.0 : 0.0;
        has_diag = has_diag || col[k] == r;
      }
      if (!has_diag)
        throw LinAlgError("apply_dirichlet: missing diagonal entry in constrained row " +
                          std::to_string(r));
      rhs[r] = values[r];
    } else {
      for (int k = ptr[r]; k < ptr[r + 1]; ++k) {
        if (constrained[col[k]]) {
          rhs[r] -= val[k] * values[col[k]];
          val[k] = 0.0;
        }
      }
    }
  }
}

} // namespace porous
