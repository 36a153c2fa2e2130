#include "dcflow/power_flow.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

#include "dcflow/errors.hpp"

namespace dcflow {

PowerFlowResult solve_power_flow(const GridModel& grid, const SparseComplexMatrix& y,
                                 std::span<const Complex> schedule,
                                 const PowerFlowOptions& options,
                                 std::span<const Complex> initial) {
  const int m = grid.num_buses();
  if (static_cast<int>(schedule.size()) != m) throw DimensionError("schedule length mismatch");

  // Unknown layout: angles of all non-slack buses, then magnitudes of PQ buses.
  std::vector<int> angle_col(m, -1), mag_col(m, -1);
  int n = 0;
  for (int k = 0; k < m; ++k) {
    if (grid.buses[k].kind != BusKind::Slack) angle_col[k] = n++;
  }
  for (int k = 0; k < m; ++k) {
    if (grid.buses[k].kind == BusKind::PQ) mag_col[k] = n++;
  }

  std::vector<double> vm(m), va(m, 0.0);
  for (int k = 0; k < m; ++k) {
    const auto& b = grid.buses[k];
    if (!initial.empty() && b.kind != BusKind::Slack) {
      vm[k] = std::abs(initial[k]);
      va[k] = std::arg(initial[k]);
      if (b.kind == BusKind::PV) vm[k] = b.v_set;
    } else {
      vm[k] = b.kind == BusKind::PQ ? 1.0 : b.v_set;
    }
  }

  PowerFlowResult result;
  ComplexVector v(m);
  auto assemble_v = [&] {
    for (int k = 0; k < m; ++k) v[k] = std::polar(vm[k], va[k]);
  };

  Eigen::VectorXd mismatch(n);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (int iter = 0; iter <= options.max_iters; ++iter) {
    assemble_v();
    const ComplexVector current = y.multiply(v);
    double worst = 0.0;
    for (int k = 0; k < m; ++k) {
      const Complex sk = v[k] * std::conj(current[k]) - schedule[k];
      if (angle_col[k] >= 0) mismatch[angle_col[k]] = sk.real();
      if (mag_col[k] >= 0) mismatch[mag_col[k]] = sk.imag();
      if (angle_col[k] >= 0) worst = std::max(worst, std::abs(sk.real()));
      if (mag_col[k] >= 0) worst = std::max(worst, std::abs(sk.imag()));
    }
    result.iterations = iter;
    result.mismatch = worst;
    if (!std::isfinite(worst)) break;
    if (worst <= options.tol) {
      result.converged = true;
      break;
    }
    if (iter == options.max_iters) break;

    // dS/dtheta = j diag(v) conj(diag(I) - Y diag(v))
    // dS/d|v|   = diag(v) conj(Y diag(v/|v|)) + conj(diag(I)) diag(v/|v|)
    std::vector<Eigen::Triplet<double>> jac;
    jac.reserve(4 * y.nnz());
    auto put = [&](int row_bus, int col_bus, Complex d_angle, Complex d_mag) {
      const int pr = angle_col[row_bus];
      const int qr = mag_col[row_bus];
      const int ac = angle_col[col_bus];
      const int mc = mag_col[col_bus];
      if (pr >= 0 && ac >= 0) jac.emplace_back(pr, ac, d_angle.real());
      if (pr >= 0 && mc >= 0) jac.emplace_back(pr, mc, d_mag.real());
      if (qr >= 0 && ac >= 0) jac.emplace_back(qr, ac, d_angle.imag());
      if (qr >= 0 && mc >= 0) jac.emplace_back(qr, mc, d_mag.imag());
    };
    const Complex j1(0.0, 1.0);
    for (int k = 0; k < m; ++k) {
      const auto cols = y.row_cols(k);
      const auto vals = y.row_values(k);
      for (std::size_t p = 0; p < cols.size(); ++p) {
        const int l = cols[p];
        const Complex unit = v[l] / vm[l];
        Complex d_angle = -j1 * v[k] * std::conj(vals[p] * v[l]);
        Complex d_mag = v[k] * std::conj(vals[p] * unit);
        if (l == k) {
          d_angle += j1 * v[k] * std::conj(current[k]);
          d_mag += std::conj(current[k]) * unit;
        }
        put(k, l, d_angle, d_mag);
      }
    }
    Eigen::SparseMatrix<double> jm(n, n);
    jm.setFromTriplets(jac.begin(), jac.end());
    jm.makeCompressed();
    lu.compute(jm);
    if (lu.info() != Eigen::Success) break;
    const Eigen::VectorXd step = lu.solve(mismatch);
    for (int k = 0; k < m; ++k) {
      if (angle_col[k] >= 0) va[k] -= step[angle_col[k]];
      if (mag_col[k] >= 0) vm[k] -= step[mag_col[k]];
    }
  }
  assemble_v();
  result.point.v = v;
  result.point.s = power_injections(y, v);
  return result;
}

PowerFlowResult solve_power_flow(const GridModel& grid, const PowerFlowOptions& options) {
  ComplexVector schedule(grid.buses.size());
  for (std::size_t k = 0; k < grid.buses.size(); ++k) {
    schedule[k] = Complex(grid.buses[k].p_set, grid.buses[k].q_set);
  }
  return solve_power_flow(grid, build_admittance(grid), schedule, options);
}

}  // namespace dcflow
