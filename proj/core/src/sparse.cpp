#include "dcflow/sparse.hpp"

#include <algorithm>
#include <cassert>

#include "dcflow/errors.hpp"

namespace dcflow {

SparseComplexMatrix SparseComplexMatrix::from_triplets(int dim,
                                                       std::vector<Triplet<Complex>> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseComplexMatrix m;
  m.dim_ = dim;
  m.row_ptr_.assign(static_cast<std::size_t>(dim) + 1, 0);
  int last_row = -1;
  int last_col = -1;
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= dim || t.col < 0 || t.col >= dim) {
      throw DimensionError("triplet outside matrix bounds");
    }
    if (t.row == last_row && t.col == last_col) {
      m.values_.back() += t.value;
      continue;
    }
    m.cols_.push_back(t.col);
    m.values_.push_back(t.value);
    ++m.row_ptr_[t.row + 1];
    last_row = t.row;
    last_col = t.col;
  }
  for (int r = 0; r < dim; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

std::span<const int> SparseComplexMatrix::row_cols(int row) const {
  return {cols_.data() + row_ptr_[row], static_cast<std::size_t>(row_ptr_[row + 1] - row_ptr_[row])};
}

std::span<const Complex> SparseComplexMatrix::row_values(int row) const {
  return {values_.data() + row_ptr_[row],
          static_cast<std::size_t>(row_ptr_[row + 1] - row_ptr_[row])};
}

Complex SparseComplexMatrix::coeff(int row, int col) const {
  const auto cols = row_cols(row);
  const auto it = std::lower_bound(cols.begin(), cols.end(), col);
  if (it == cols.end() || *it != col) return {};
  return row_values(row)[static_cast<std::size_t>(it - cols.begin())];
}

ComplexVector SparseComplexMatrix::multiply(std::span<const Complex> x) const {
  if (static_cast<int>(x.size()) != dim_) throw DimensionError("matrix-vector size mismatch");
  ComplexVector y(x.size());
  for (int r = 0; r < dim_; ++r) {
    Complex acc{};
    for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) acc += values_[p] * x[cols_[p]];
    y[r] = acc;
  }
  return y;
}

SparseVector SparseVector::from_pairs(std::vector<std::pair<int, double>> pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseVector v;
  for (const auto& [i, x] : pairs) {
    if (!v.index.empty() && v.index.back() == i) {
      v.value.back() += x;
    } else {
      v.index.push_back(i);
      v.value.push_back(x);
    }
  }
  std::size_t w = 0;
  for (std::size_t r = 0; r < v.index.size(); ++r) {
    if (v.value[r] != 0.0) {
      v.index[w] = v.index[r];
      v.value[w] = v.value[r];
      ++w;
    }
  }
  v.index.resize(w);
  v.value.resize(w);
  return v;
}

double SparseVector::dot(std::span<const double> x) const {
  double acc = 0.0;
  for (std::size_t p = 0; p < index.size(); ++p) acc += value[p] * x[index[p]];
  return acc;
}

double SparseVector::coeff(int i) const {
  const auto it = std::lower_bound(index.begin(), index.end(), i);
  if (it == index.end() || *it != i) return 0.0;
  return value[static_cast<std::size_t>(it - index.begin())];
}

SymmetricSparse SymmetricSparse::symmetrized(int dim, std::vector<Triplet<double>> entries) {
  std::vector<Triplet<double>> both;
  both.reserve(entries.size() * 2);
  for (const auto& e : entries) {
    both.push_back({e.row, e.col, 0.5 * e.value});
    both.push_back({e.col, e.row, 0.5 * e.value});
  }
  std::sort(both.begin(), both.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SymmetricSparse s;
  s.dim = dim;
  for (const auto& e : both) {
    if (!s.row.empty() && s.row.back() == e.row && s.col.back() == e.col) {
      s.value.back() += e.value;
    } else {
      s.row.push_back(e.row);
      s.col.push_back(e.col);
      s.value.push_back(e.value);
    }
  }
  std::size_t w = 0;
  for (std::size_t r = 0; r < s.value.size(); ++r) {
    if (s.value[r] != 0.0) {
      s.row[w] = s.row[r];
      s.col[w] = s.col[r];
      s.value[w] = s.value[r];
      ++w;
    }
  }
  s.row.resize(w);
  s.col.resize(w);
  s.value.resize(w);
  return s;
}

double SymmetricSparse::coeff(int r, int c) const {
  for (std::size_t p = 0; p < value.size(); ++p) {
    if (row[p] == r && col[p] == c) return value[p];
  }
  return 0.0;
}

double SymmetricSparse::quadratic_form(std::span<const double> z) const {
  double acc = 0.0;
  for (std::size_t p = 0; p < value.size(); ++p) acc += value[p] * z[row[p]] * z[col[p]];
  return acc;
}

void SymmetricSparse::multiply_add(std::span<const double> z, double scale,
                                   std::span<double> out) const {
  for (std::size_t p = 0; p < value.size(); ++p) out[row[p]] += scale * value[p] * z[col[p]];
}

SymmetricSparse SymmetricSparse::negated() const {
  SymmetricSparse n = *this;
  for (auto& v : n.value) v = -v;
  return n;
}

std::vector<int> SymmetricSparse::support() const {
  std::vector<int> s(row.begin(), row.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

}  // namespace dcflow
