#include "dcflow/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "dcflow/errors.hpp"

namespace dcflow::oracle {

std::vector<double> dense_symmetric_eigs(const DenseMatrix& input, DenseMatrix* vectors) {
  if (input.rows != input.cols) throw DimensionError("matrix is not square");
  const int n = input.rows;
  DenseMatrix a = input;
  double fro = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      fro += a(i, j) * a(i, j);
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * (1.0 + std::abs(a(i, j)))) {
        throw DimensionError("matrix is not symmetric");
      }
    }
  }
  fro = std::sqrt(fro);
  DenseMatrix q(n, n);
  for (int i = 0; i < n; ++i) q(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    }
    if (std::sqrt(off) <= 1e-12 * fro) break;
    for (int p = 0; p < n; ++p) {
      for (int r = p + 1; r < n; ++r) {
        if (a(p, r) == 0.0) continue;
        const double tau = (a(r, r) - a(p, p)) / (2.0 * a(p, r));
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akr = a(k, r);
          a(k, p) = c * akp - s * akr;
          a(k, r) = s * akp + c * akr;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double ark = a(r, k);
          a(p, k) = c * apk - s * ark;
          a(r, k) = s * apk + c * ark;
        }
        for (int k = 0; k < n; ++k) {
          const double qkp = q(k, p);
          const double qkr = q(k, r);
          q(k, p) = c * qkp - s * qkr;
          q(k, r) = s * qkp + c * qkr;
        }
      }
    }
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a(order[i], order[i]);
  if (vectors) {
    *vectors = DenseMatrix(n, n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) (*vectors)(k, i) = q(k, order[i]);
    }
  }
  return eig;
}

std::vector<double> finite_diff_gradient(const std::function<double(std::span<const double>)>& f,
                                         std::span<const double> x, double h) {
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = xp[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

DenseMatrix to_dense(const SymmetricSparse& s) {
  DenseMatrix d(s.dim, s.dim);
  for (std::size_t p = 0; p < s.value.size(); ++p) d(s.row[p], s.col[p]) += s.value[p];
  return d;
}

std::vector<double> dense_constraint_eval(const QclpProblem& problem, std::span<const double> x) {
  std::vector<double> out;
  out.reserve(problem.constraints.size());
  std::vector<double> lin(x.size());
  for (const auto& c : problem.constraints) {
    const DenseMatrix p = to_dense(c.hessian);
    double acc = 0.0;
    for (int i = 0; i < p.rows; ++i) {
      for (int j = 0; j < p.cols; ++j) acc += x[i] * p(i, j) * x[j];
    }
    std::fill(lin.begin(), lin.end(), 0.0);
    for (std::size_t q = 0; q < c.linear.index.size(); ++q) lin[c.linear.index[q]] = c.linear.value[q];
    for (std::size_t i = 0; i < x.size(); ++i) acc += lin[i] * x[i];
    out.push_back(acc + c.constant);
  }
  return out;
}

DenseComplex dense_admittance(const GridModel& grid) {
  const int m = grid.num_buses();
  DenseComplex y(m, std::vector<Complex>(m));
  for (int k = 0; k < m; ++k) y[k][k] = grid.buses[k].shunt;
  for (const auto& br : grid.branches) {
    const Complex a = 1.0 / br.impedance;
    y[br.from][br.to] += a;
    y[br.to][br.from] += a;
    y[br.from][br.from] -= a;
    y[br.to][br.to] -= a;
  }
  return y;
}

ComplexVector dense_power_injections(const DenseComplex& y, std::span<const Complex> v) {
  const std::size_t m = y.size();
  ComplexVector s(m);
  for (std::size_t k = 0; k < m; ++k) {
    Complex i{};
    for (std::size_t l = 0; l < m; ++l) i += y[k][l] * v[l];
    s[k] = v[k] * std::conj(i);
  }
  return s;
}

ComplexVector dense_delta_power(const DenseComplex& y, std::span<const Complex> v0,
                                std::span<const double> z) {
  const std::size_t m = y.size();
  ComplexVector v1(m);
  for (std::size_t k = 0; k < m; ++k) v1[k] = v0[k] + Complex(z[k], z[m + k]);
  const auto s1 = dense_power_injections(y, v1);
  const auto s0 = dense_power_injections(y, v0);
  ComplexVector d(m);
  for (std::size_t k = 0; k < m; ++k) d[k] = s1[k] - s0[k];
  return d;
}

std::pair<DenseMatrix, DenseMatrix> dense_power_hessians(const DenseComplex& y, int k) {
  const int m = static_cast<int>(y.size());
  DenseMatrix hr(2 * m, 2 * m), hq(2 * m, 2 * m);
  for (int j = 0; j < m; ++j) {
    const double g = y[k][j].real();
    const double b = y[k][j].imag();
    hr(k, j) = g;
    hr(k, m + j) = -b;
    hr(m + k, j) = b;
    hr(m + k, m + j) = g;
    hq(k, j) = -b;
    hq(k, m + j) = -g;
    hq(m + k, j) = g;
    hq(m + k, m + j) = -b;
  }
  auto sym = [](DenseMatrix& a) {
    for (int i = 0; i < a.rows; ++i) {
      for (int j = i + 1; j < a.cols; ++j) {
        const double v = 0.5 * (a(i, j) + a(j, i));
        a(i, j) = v;
        a(j, i) = v;
      }
    }
  };
  sym(hr);
  sym(hq);
  return {hr, hq};
}

DenseMatrix restrict(const DenseMatrix& a, std::span<const int> index) {
  const int n = static_cast<int>(index.size());
  DenseMatrix r(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) r(i, j) = a(index[i], index[j]);
  }
  return r;
}

}  // namespace dcflow::oracle
