#include "dcflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dcflow/dc_split.hpp"
#include "dcflow/errors.hpp"
#include "dcflow/inner_solver.hpp"
#include "dcflow/oracle.hpp"
#include "dcflow/perturb.hpp"
#include "dcflow/power_flow.hpp"
#include "dcflow/qclp.hpp"
#include "json.hpp"

namespace dcflow {

namespace {

OperatingPoint flow_point(const GridModel& grid) {
  const auto pf = solve_power_flow(grid);
  if (!pf.converged) throw ModelError("power flow did not converge");
  return pf.point;
}

// Indices of rows holding a nonzero entry.
std::vector<int> nonzero_rows(const oracle::DenseMatrix& a) {
  std::vector<int> out;
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) {
      if (a(i, j) != 0.0) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

double largest_magnitude(const std::vector<double>& eigs) {
  double m = 0.0;
  for (const double e : eigs) m = std::max(m, std::abs(e));
  return m;
}

}  // namespace

EigenCheck check_power_eigs(const GridModel& grid) {
  const auto y = build_admittance(grid);
  const auto yd = oracle::dense_admittance(grid);
  EigenCheck out;
  for (int k = 0; k < grid.num_buses(); ++k) {
    const PowerEigs analytic = analytic_power_eigs(y, k);
    const auto [hr, hq] = oracle::dense_power_hessians(yd, k);
    for (const auto& [dense, eig] :
         {std::pair{&hr, analytic.active}, std::pair{&hq, analytic.reactive}}) {
      const auto idx = nonzero_rows(*dense);
      const double ref = largest_magnitude(oracle::dense_symmetric_eigs(oracle::restrict(*dense, idx)));
      const double err = std::abs(eig.magnitude - ref) / std::max(ref, 1e-300);
      out.max_rel_error = std::max(out.max_rel_error, err);
      ++out.matrices;
    }
  }

  const QclpProblem qp = assemble_qclp(grid, y, flow_point(grid), kUnbounded);
  const auto splits = split_all(qp, y);
  for (std::size_t i = 0; i < qp.num_rows(); ++i) {
    const auto& c = qp.constraints[i];
    const auto& s = splits[i];
    if (!c.active || s.support.empty()) continue;
    const oracle::DenseMatrix p = oracle::restrict(oracle::to_dense(c.hessian), s.support);
    oracle::DenseMatrix concave(p.rows, p.cols);
    for (int a = 0; a < p.rows; ++a) {
      for (int b = 0; b < p.cols; ++b) concave(a, b) = (a == b ? s.alpha : 0.0) - p(a, b);
    }
    const auto eigs = oracle::dense_symmetric_eigs(concave);
    out.min_concave_eig = std::min(out.min_concave_eig, eigs.front());
  }
  return out;
}

double check_delta_power(const GridModel& grid, int samples, std::uint64_t seed, double scale) {
  const auto y = build_admittance(grid);
  const auto yd = oracle::dense_admittance(grid);
  const OperatingPoint op = flow_point(grid);
  const int m = grid.num_buses();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  Vector z(2 * m);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (auto& v : z) v = dist(rng);
    const PowerDelta sparse = delta_power(z, y, op.v);
    const ComplexVector dense = oracle::dense_delta_power(yd, op.v, z);
    for (int k = 0; k < m; ++k) {
      worst = std::max({worst, std::abs(sparse.p[k] - dense[k].real()),
                        std::abs(sparse.q[k] - dense[k].imag())});
    }
  }
  return worst;
}

double check_constraint_eval(const GridModel& grid, int samples, std::uint64_t seed) {
  const auto y = build_admittance(grid);
  const QclpProblem qp = assemble_qclp(grid, y, flow_point(grid), kUnbounded);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  Vector x(qp.x_dim);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (auto& v : x) v = dist(rng);
    const Vector sparse = evaluate_constraints(qp, x);
    const auto dense = oracle::dense_constraint_eval(qp, x);
    for (std::size_t i = 0; i < dense.size(); ++i) {
      worst = std::max(worst, std::abs(sparse[i] - dense[i]) / std::max(1.0, std::abs(dense[i])));
    }
  }
  return worst;
}

double check_dual_gradient(const GridModel& grid, int samples, std::uint64_t seed, double h) {
  const auto y = build_admittance(grid);
  PerturbSpec spec;
  spec.seed = seed;
  spec.magnitude = 0.02;
  const OperatingPoint op = perturb(flow_point(grid), grid, spec).point;
  const QclpProblem qp = assemble_qclp(grid, y, op, kUnbounded);
  const auto splits = split_all(qp, y);
  const LiftedProblem lp =
      linearize(qp, splits, with_tight_slacks(qp, Vector(qp.z_dim, 0.0)), 3.0);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Vector lambda(lp.num_rows), grad(lp.num_rows);
  const auto f = [&](std::span<const double> l) { return dual_value_grad(l, lp, {}); };
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (auto& v : lambda) v = dist(rng);
    dual_value_grad(lambda, lp, grad);
    const auto fd = oracle::finite_diff_gradient(f, lambda, h);
    double diff = 0.0;
    double norm = 0.0;
    for (int i = 0; i < lp.num_rows; ++i) {
      diff = std::max(diff, std::abs(grad[i] - fd[i]));
      norm = std::max(norm, std::abs(grad[i]));
    }
    worst = std::max(worst, diff / std::max(norm, 1e-300));
  }
  return worst;
}

VerifyReport verify_grid(const GridModel& grid, std::uint64_t seed) {
  VerifyReport r;
  r.eigs = check_power_eigs(grid);
  r.delta_power = check_delta_power(grid, 100, seed);
  r.constraint_eval = check_constraint_eval(grid, 10, seed);
  r.dual_gradient = check_dual_gradient(grid, 10, seed);
  r.passed = r.eigs.max_rel_error <= 1e-9 && r.eigs.min_concave_eig >= -1e-10 &&
             r.delta_power <= 1e-10 && r.constraint_eval <= 1e-10 && r.dual_gradient <= 1e-5;
  return r;
}

std::string verify_to_json(const VerifyReport& r) {
  const nlohmann::json doc = {{"eigen_matrices", r.eigs.matrices},
                              {"eigen_max_rel_error", r.eigs.max_rel_error},
                              {"concave_min_eig", r.eigs.min_concave_eig},
                              {"delta_power_max_error", r.delta_power},
                              {"constraint_eval_max_error", r.constraint_eval},
                              {"dual_gradient_max_rel_error", r.dual_gradient},
                              {"passed", r.passed}};
  return doc.dump(2);
}

}  // namespace dcflow
