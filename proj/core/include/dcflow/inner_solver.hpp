#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "dcflow/dc_split.hpp"
#include "dcflow/qclp.hpp"

namespace dcflow {

/// Convexified subproblem around x~ in lifted form:
///
///   min sum_i t_i   s.t.  C z + D y - d <= t,  t >= 0,  y >= z.^2
///
/// Row i of D is a single nonnegative weight on the same columns as row i of C.
/// Operational rows carry the penalty beta inside C, D and d; cost rows are
/// unscaled and their slack u equals t.
struct LiftedProblem {
  int num_rows = 0;
  int z_dim = 0;
  int x_dim = 0;
  int num_operational = 0;
  double beta = 1.0;
  double eps = 1e-8;

  std::vector<int> row_ptr{0};
  std::vector<int> col;
  std::vector<double> c_val;
  std::vector<double> d_weight;  ///< per row
  Vector d;
  std::vector<int> slack;        ///< x index of the row's slack, -1 for operational rows

  std::size_t nnz() const { return col.size(); }
  /// Row i of C z + D y - d.
  double row_value(int i, std::span<const double> z, std::span<const double> y) const;
};

LiftedProblem linearize(const QclpProblem& problem, std::span<const SplitConstraint> splits,
                        std::span<const double> x_tilde, double beta, double eps = 1e-8);

/// F(lambda) = 1/4 sum_j (C^T lambda)_j^2 / ((D^T lambda)_j + eps) + d^T lambda,
/// the negated dual. `grad` may be empty.
double dual_value_grad(std::span<const double> lambda, const LiftedProblem& lp,
                       std::span<double> grad);

Vector project_box(std::span<const double> v);

struct InnerOptions {
  int max_iters = 1000;
  double tol = 1e-8;
  double armijo = 1e-4;
  double backtrack = 0.5;
  double growth = 2.0;
  int max_backtracks = 60;
  /// Scale each coordinate's step by the inverse diagonal of the dual
  /// Hessian, refreshed every `refresh` iterations with a momentum restart.
  bool precondition = true;
  int refresh = 25;
  std::ostream* trace = nullptr;  ///< CSV iter,dual_value,step,ls_trials,pg_norm
};

struct InnerSolution {
  Vector lambda;
  Vector x;  ///< [z; u]
  Vector y;
  Vector t;
  int iterations = 0;
  double final_step = 0.0;
  double dual_value = 0.0;  ///< -F(lambda), a lower bound on the subproblem optimum
  double primal_value = 0.0;
  double pg_norm = 0.0;
  bool converged = false;
};

/// An empty `lambda_init` starts at the box midpoint. The dual is close to
/// positively homogeneous, so its curvature blows up near lambda = 0 and a
/// start there stalls.
InnerSolution solve_inner(const LiftedProblem& lp, std::span<const double> lambda_init,
                          const InnerOptions& options = {});

struct PrimalPoint {
  Vector x;
  Vector y;
  Vector t;
};

/// z = -1/2 (C^T lambda) / (D^T lambda + eps), y = z.^2, t = (C z + D y - d)+.
PrimalPoint recover_primal(std::span<const double> lambda, const LiftedProblem& lp);

/// sum_i (C z + D y - d)_i^+ for the given lifted pair.
double lifted_objective(const LiftedProblem& lp, std::span<const double> z,
                        std::span<const double> y);

}  // namespace dcflow
