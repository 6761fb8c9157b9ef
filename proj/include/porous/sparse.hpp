#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace porous {

struct LinAlgError : std::runtime_error {
  explicit LinAlgError(const std::string& what) : std::runtime_error(what) {}
};

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Square CSR matrix. Column indices are strictly increasing within each row
/// and duplicates are summed at construction.
class SparseMatrix {
public:
  SparseMatrix() = default;

  static SparseMatrix from_triplets(int n, std::vector<Triplet> entries);
  static SparseMatrix identity(int n);
  static SparseMatrix from_diagonal(const std::vector<double>& diag);

  int size() const { return n_; }
  int nonzeros() const { return static_cast<int>(values_.size()); }

  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  std::vector<double> multiply(const std::vector<double>& x) const;

  /// Entry lookup; absent entries read as zero.
  double coeff(int i, int j) const;

  std::vector<double> diagonal() const;

  /// this += alpha * other (patterns are merged).
  void add_scaled(const SparseMatrix& other, double alpha);
  /// this += diag(d); missing diagonal entries are inserted.
  void add_diagonal(const std::vector<double>& d);

  std::vector<std::vector<double>> to_dense() const;

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_ind() const { return col_ind_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

private:
  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_ind_;
  std::vector<double> values_;
};

/// Symmetric elimination of Dirichlet constraints: constrained rows and
/// columns are zeroed, the diagonal set to 1, the right-hand side receives
/// the moved column contributions, and rhs_i = values_i on constrained nodes.
/// `allowed` is the mesh's Dirichlet node set (sorted); constraining a node
/// outside it is an error.
void apply_dirichlet(SparseMatrix& matrix, std::vector<double>& rhs,
                     const std::vector<int>& nodes, const std::vector<double>& values,
                     const std::vector<int>& allowed);

} // namespace porous
