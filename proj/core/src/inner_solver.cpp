#include "dcflow/inner_solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "dcflow/errors.hpp"

namespace dcflow {

double LiftedProblem::row_value(int i, std::span<const double> z,
                                std::span<const double> y) const {
  double cz = 0.0;
  double dy = 0.0;
  for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
    cz += c_val[p] * z[col[p]];
    dy += y[col[p]];
  }
  return cz + d_weight[i] * dy - d[i];
}

LiftedProblem linearize(const QclpProblem& problem, std::span<const SplitConstraint> splits,
                        std::span<const double> x_tilde, double beta, double eps) {
  if (splits.size() != problem.num_rows()) throw DimensionError("one split per row required");
  if (static_cast<int>(x_tilde.size()) < problem.z_dim) throw DimensionError("x~ too short");
  if (!(beta > 0.0)) throw SolverError("beta must be positive");

  LiftedProblem lp;
  lp.num_rows = static_cast<int>(problem.num_rows());
  lp.z_dim = problem.z_dim;
  lp.x_dim = problem.x_dim;
  lp.num_operational = problem.num_operational();
  lp.beta = beta;
  lp.eps = eps;
  lp.d.resize(lp.num_rows);
  lp.d_weight.resize(lp.num_rows);
  lp.slack.resize(lp.num_rows);

  const std::span<const double> zt = x_tilde.first(problem.z_dim);
  Vector pminus(problem.z_dim, 0.0);
  for (int i = 0; i < lp.num_rows; ++i) {
    const auto& c = problem.constraints[i];
    const auto& s = splits[i];
    lp.slack[i] = c.slack;
    if (!c.active) {
      lp.d_weight[i] = 0.0;
      lp.d[i] = 1.0;
      lp.row_ptr.push_back(static_cast<int>(lp.col.size()));
      continue;
    }
    const double scale = problem.is_operational(i) ? beta : 1.0;

    // P- x~ on the support; the Hessian lives inside it.
    for (const int j : s.support) pminus[j] = 0.0;
    s.concave_multiply_add(c, zt, 1.0, pminus);
    double quad = 0.0;
    for (const int j : s.support) quad += zt[j] * pminus[j];

    std::size_t lp_pos = 0;
    for (const int j : s.support) {
      while (lp_pos < c.linear.nnz() && c.linear.index[lp_pos] < j) ++lp_pos;
      const double pj =
          lp_pos < c.linear.nnz() && c.linear.index[lp_pos] == j ? c.linear.value[lp_pos] : 0.0;
      lp.col.push_back(j);
      lp.c_val.push_back(scale * (pj - 2.0 * pminus[j]));
    }
    lp.row_ptr.push_back(static_cast<int>(lp.col.size()));
    lp.d_weight[i] = scale * s.alpha;
    lp.d[i] = -scale * (c.constant + quad);
  }
  return lp;
}

namespace {

// Scatter a = C^T lambda, b = D^T lambda + eps.
void column_sums(std::span<const double> lambda, const LiftedProblem& lp, std::span<double> a,
                 std::span<double> b) {
  std::fill(a.begin(), a.end(), 0.0);
  std::fill(b.begin(), b.end(), lp.eps);
  for (int i = 0; i < lp.num_rows; ++i) {
    const double li = lambda[i];
    if (li == 0.0) continue;
    const double wi = lp.d_weight[i] * li;
    for (int p = lp.row_ptr[i]; p < lp.row_ptr[i + 1]; ++p) {
      a[lp.col[p]] += lp.c_val[p] * li;
      b[lp.col[p]] += wi;
    }
  }
}

double value_from_sums(std::span<const double> lambda, const LiftedProblem& lp,
                       std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (int j = 0; j < lp.z_dim; ++j) acc += a[j] * a[j] / b[j];
  acc *= 0.25;
  for (int i = 0; i < lp.num_rows; ++i) acc += lp.d[i] * lambda[i];
  return acc;
}

// grad_i = sum_j (C_ij w_j / 2 - D_ij w_j^2 / 4) + d_i with w = a / b; w is
// overwritten into `a`.
void gradient_from_sums(const LiftedProblem& lp, std::span<double> a, std::span<const double> b,
                        std::span<double> grad) {
  for (int j = 0; j < lp.z_dim; ++j) a[j] /= b[j];
  for (int i = 0; i < lp.num_rows; ++i) {
    double lin = 0.0;
    double sq = 0.0;
    for (int p = lp.row_ptr[i]; p < lp.row_ptr[i + 1]; ++p) {
      const double w = a[lp.col[p]];
      lin += lp.c_val[p] * w;
      sq += w * w;
    }
    grad[i] = 0.5 * lin - 0.25 * lp.d_weight[i] * sq + lp.d[i];
  }
}

void inverse_hessian_diag(std::span<const double> lambda, const LiftedProblem& lp,
                          std::span<double> a, std::span<double> b, std::span<double> h) {
  column_sums(lambda, lp, a, b);
  for (int j = 0; j < lp.z_dim; ++j) a[j] /= b[j];
  double top = 0.0;
  for (int i = 0; i < lp.num_rows; ++i) {
    double acc = 0.0;
    for (int p = lp.row_ptr[i]; p < lp.row_ptr[i + 1]; ++p) {
      const int j = lp.col[p];
      const double r = lp.c_val[p] - a[j] * lp.d_weight[i];
      acc += r * r / b[j];
    }
    h[i] = acc > 0.0 ? 2.0 / acc : 0.0;
    top = std::max(top, h[i]);
  }
  for (auto& v : h) v = v > 0.0 ? v / top : 1.0;
  if (top == 0.0) std::fill(h.begin(), h.end(), 1.0);
}

struct Workspace {
  Vector a, b;
  explicit Workspace(int n) : a(n), b(n) {}

  double value(std::span<const double> lambda, const LiftedProblem& lp) {
    column_sums(lambda, lp, a, b);
    return value_from_sums(lambda, lp, a, b);
  }
  double value_grad(std::span<const double> lambda, const LiftedProblem& lp,
                    std::span<double> grad) {
    column_sums(lambda, lp, a, b);
    const double v = value_from_sums(lambda, lp, a, b);
    gradient_from_sums(lp, a, b, grad);
    return v;
  }
};

}  // namespace

double dual_value_grad(std::span<const double> lambda, const LiftedProblem& lp,
                       std::span<double> grad) {
  if (static_cast<int>(lambda.size()) != lp.num_rows) throw DimensionError("lambda length");
  Workspace ws(lp.z_dim);
  if (grad.empty()) return ws.value(lambda, lp);
  if (static_cast<int>(grad.size()) != lp.num_rows) throw DimensionError("gradient length");
  return ws.value_grad(lambda, lp, grad);
}

Vector project_box(std::span<const double> v) {
  Vector out(v.begin(), v.end());
  for (auto& x : out) x = std::clamp(x, 0.0, 1.0);
  return out;
}

InnerSolution solve_inner(const LiftedProblem& lp, std::span<const double> lambda_init,
                          const InnerOptions& options) {
  const int n = lp.num_rows;
  if (options.max_iters < 1) throw SolverError("max_iters must be >= 1");
  Workspace ws(lp.z_dim);

  Vector lam(n, 0.5);
  if (!lambda_init.empty()) {
    if (static_cast<int>(lambda_init.size()) != n) throw DimensionError("lambda_init length");
    for (int i = 0; i < n; ++i) lam[i] = std::clamp(lambda_init[i], 0.0, 1.0);
  }
  Vector prev = lam, yk(n), grad(n), cand(n), scale(n, 1.0);

  double f_lam = ws.value(lam, lp);
  if (!std::isfinite(f_lam)) throw SolverError("dual objective is not finite");
  double theta = 1.0;
  double step = 0.0;
  double pg = 0.0;
  int iter = 0;
  bool converged = false;
  if (options.trace) *options.trace << "iter,dual_value,step,ls_trials,pg_norm\n";

  for (iter = 1; iter <= options.max_iters; ++iter) {
    if (options.precondition && (iter - 1) % std::max(1, options.refresh) == 0) {
      inverse_hessian_diag(lam, lp, ws.a, ws.b, scale);
      theta = 1.0;
      prev = lam;
      step = 0.0;
    }
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const double mom = (theta - 1.0) / theta_next;
    for (int i = 0; i < n; ++i) yk[i] = std::clamp(lam[i] + mom * (lam[i] - prev[i]), 0.0, 1.0);

    bool restarted = false;
    int trials = 0;
    double f_new = 0.0;
    double s = 0.0;
    for (;;) {
      const double f_y = ws.value_grad(yk, lp, grad);
      if (!std::isfinite(f_y)) throw SolverError("dual objective is not finite");
      s = step > 0.0 ? options.growth * step : 1.0;
      trials = 0;
      double decrease = 0.0;
      for (;;) {
        ++trials;
        decrease = 0.0;
        for (int i = 0; i < n; ++i) {
          cand[i] = std::clamp(yk[i] - s * scale[i] * grad[i], 0.0, 1.0);
          decrease += grad[i] * (cand[i] - yk[i]);
        }
        f_new = ws.value(cand, lp);
        if (std::isfinite(f_new) && f_new <= f_y + options.armijo * decrease) break;
        if (trials >= options.max_backtracks) break;
        s *= options.backtrack;
      }
      double dist = 0.0;
      for (int i = 0; i < n; ++i) {
        const double g = (cand[i] - yk[i]) / scale[i];
        dist += g * g;
      }
      pg = std::sqrt(dist) / s;
      if (f_new <= f_lam || restarted) break;
      // Objective went up: drop the momentum and take a plain step from lam.
      restarted = true;
      theta = 1.0;
      yk = lam;
    }
    if (!std::isfinite(f_new)) throw SolverError("dual objective is not finite");
    step = s;

    if (f_new <= f_lam) {
      prev.swap(lam);
      lam.swap(cand);
      f_lam = f_new;
      theta = restarted ? 1.0 : theta_next;
    } else {
      // Line search exhausted without descent; stay put.
      prev = lam;
      theta = 1.0;
    }
    if (options.trace) {
      *options.trace << iter << ',' << -f_lam << ',' << step << ',' << trials << ',' << pg
                     << '\n';
    }
    if (pg <= options.tol) {
      converged = true;
      break;
    }
  }

  InnerSolution sol;
  sol.iterations = std::min(iter, options.max_iters);
  sol.final_step = step;
  sol.dual_value = -f_lam;
  sol.pg_norm = pg;
  sol.converged = converged;
  auto primal = recover_primal(lam, lp);
  sol.x = std::move(primal.x);
  sol.y = std::move(primal.y);
  sol.t = std::move(primal.t);
  sol.primal_value = 0.0;
  for (const double ti : sol.t) sol.primal_value += ti;
  sol.lambda = std::move(lam);
  return sol;
}

PrimalPoint recover_primal(std::span<const double> lambda, const LiftedProblem& lp) {
  if (static_cast<int>(lambda.size()) != lp.num_rows) throw DimensionError("lambda length");
  Vector a(lp.z_dim), b(lp.z_dim);
  column_sums(lambda, lp, a, b);
  PrimalPoint out;
  out.x.assign(lp.x_dim, 0.0);
  out.y.resize(lp.z_dim);
  for (int j = 0; j < lp.z_dim; ++j) {
    out.x[j] = -0.5 * a[j] / b[j];
    out.y[j] = out.x[j] * out.x[j];
  }
  const std::span<const double> z(out.x.data(), lp.z_dim);
  out.t.resize(lp.num_rows);
  for (int i = 0; i < lp.num_rows; ++i) {
    out.t[i] = std::max(0.0, lp.row_value(i, z, out.y));
    if (lp.slack[i] >= 0) out.x[lp.slack[i]] = out.t[i];
  }
  return out;
}

double lifted_objective(const LiftedProblem& lp, std::span<const double> z,
                        std::span<const double> y) {
  double acc = 0.0;
  for (int i = 0; i < lp.num_rows; ++i) acc += std::max(0.0, lp.row_value(i, z, y));
  return acc;
}

}  // namespace dcflow
