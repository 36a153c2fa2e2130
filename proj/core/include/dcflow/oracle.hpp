#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dcflow/grid.hpp"
#include "dcflow/qclp.hpp"

// Slow dense reference computations for tests and `dcflow verify`. Nothing
// here calls into the sparse production path.
namespace dcflow::oracle {

/// Row-major dense real matrix.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

using DenseComplex = std::vector<std::vector<Complex>>;

/// Cyclic Jacobi; ascending eigenvalues. Throws DimensionError when A is not
/// square or not symmetric. When `vectors` is given it receives Q (columns).
std::vector<double> dense_symmetric_eigs(const DenseMatrix& a, DenseMatrix* vectors = nullptr);

std::vector<double> finite_diff_gradient(const std::function<double(std::span<const double>)>& f,
                                         std::span<const double> x, double h = 1e-6);

DenseMatrix to_dense(const SymmetricSparse& s);
/// Row values x^T P x + p^T x + omega with every P materialized densely.
std::vector<double> dense_constraint_eval(const QclpProblem& problem, std::span<const double> x);

DenseComplex dense_admittance(const GridModel& grid);
/// s_k = v_k * conj(sum_l Y_kl v_l)
ComplexVector dense_power_injections(const DenseComplex& y, std::span<const Complex> v);
/// s(v0 + dv) - s(v0) in complex arithmetic, dv = z_re + i z_im.
ComplexVector dense_delta_power(const DenseComplex& y, std::span<const Complex> v0,
                                std::span<const double> z);

/// sym(H_r,k), sym(H_q,k) built from Y^(k) = e_k e_k^T Y as 2M x 2M blocks.
std::pair<DenseMatrix, DenseMatrix> dense_power_hessians(const DenseComplex& y, int k);

/// Principal submatrix on `index`.
DenseMatrix restrict(const DenseMatrix& a, std::span<const int> index);

}  // namespace dcflow::oracle
