#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace dcflow {

using Complex = std::complex<double>;
using Vector = std::vector<double>;
using ComplexVector = std::vector<Complex>;

template <typename T>
struct Triplet {
  int row;
  int col;
  T value;
};

/// Square complex matrix in compressed row storage. Duplicate triplets are
/// summed; column indices are sorted within each row.
class SparseComplexMatrix {
 public:
  SparseComplexMatrix() = default;
  static SparseComplexMatrix from_triplets(int dim, std::vector<Triplet<Complex>> triplets);

  int dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const int> row_cols(int row) const;
  std::span<const Complex> row_values(int row) const;
  Complex coeff(int row, int col) const;

  /// y = A x
  ComplexVector multiply(std::span<const Complex> x) const;

 private:
  int dim_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  ComplexVector values_;
};

/// Sorted sparse vector with unique indices; exact zeros are dropped.
struct SparseVector {
  std::vector<int> index;
  std::vector<double> value;

  static SparseVector from_pairs(std::vector<std::pair<int, double>> pairs);
  std::size_t nnz() const noexcept { return index.size(); }
  double dot(std::span<const double> x) const;
  double coeff(int i) const;
};

/// Symmetric matrix stored as its full coordinate list (both triangles),
/// sorted by (row, col), unique, exact zeros dropped.
struct SymmetricSparse {
  int dim = 0;
  std::vector<int> row;
  std::vector<int> col;
  std::vector<double> value;

  /// Builds sym(A) = (A + A^T)/2 from an arbitrary coordinate list.
  static SymmetricSparse symmetrized(int dim, std::vector<Triplet<double>> entries);

  std::size_t nnz() const noexcept { return value.size(); }
  double coeff(int r, int c) const;
  double quadratic_form(std::span<const double> z) const;
  /// out += scale * A z
  void multiply_add(std::span<const double> z, double scale, std::span<double> out) const;
  SymmetricSparse negated() const;
  /// Sorted indices of rows/columns holding at least one entry.
  std::vector<int> support() const;
};

}  // namespace dcflow
