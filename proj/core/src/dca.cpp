#include "dcflow/dca.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "dcflow/errors.hpp"

namespace dcflow {

void DcaParams::validate() const {
  if (!(beta0 > 0.0 && delta1 > 0.0 && delta2 > 0.0 && eps_x > 0.0 && eps_t > 0.0 &&
        eps > 0.0 && inner_tol >= 0.0)) {
    throw SolverError("DCA parameters must be positive");
  }
  if (max_outer < 1 || inner_iters < 1) throw SolverError("iteration caps must be >= 1");
}

int default_inner_iters(int num_buses) { return num_buses <= 300 ? 100 : 1000; }

const char* to_string(DcaStatus status) {
  switch (status) {
    case DcaStatus::Converged: return "converged";
    case DcaStatus::IterLimit: return "iteration_limit";
    case DcaStatus::InnerFailure: return "inner_failure";
  }
  return "unknown";
}

int DcaResult::total_inner_iters() const {
  int n = 0;
  for (const auto& r : history) n += r.inner_iters;
  return n;
}

double violation_magnitude(const QuadraticConstraint& c, double r) {
  if (r <= 0.0) return 0.0;
  switch (c.kind) {
    case ConstraintKind::VoltUpper:
    case ConstraintKind::Line:
      return std::sqrt(r + c.limit * c.limit) - c.limit;
    case ConstraintKind::VoltLower: {
      const double rest = c.limit * c.limit - r;
      return c.limit - (rest > 0.0 ? std::sqrt(rest) : 0.0);
    }
    default:
      return r;
  }
}

Violation true_violation(const QclpProblem& problem, std::span<const double> x) {
  Violation v;
  for (int i = 0; i < problem.num_operational(); ++i) {
    const auto& c = problem.constraints[i];
    if (!c.active) continue;
    const double r = c.evaluate(x);
    if (r <= 0.0) continue;
    v.squared = std::max(v.squared, r);
    const double mag = violation_magnitude(c, r);
    if (mag > v.magnitude) {
      v.magnitude = mag;
      v.row = i;
    }
  }
  return v;
}

KktResidual kkt_residual(const QclpProblem& problem, std::span<const double> x,
                         std::span<const double> lambda) {
  if (lambda.size() != problem.num_rows()) throw DimensionError("one multiplier per row");
  if (static_cast<int>(x.size()) != problem.x_dim) throw DimensionError("x length mismatch");
  Vector g(problem.cost.begin(), problem.cost.end());
  Vector term(problem.x_dim, 0.0);
  double largest = 0.0;
  double comp = 0.0;
  double lam_max = 0.0;
  for (std::size_t i = 0; i < problem.num_rows(); ++i) {
    const auto& c = problem.constraints[i];
    if (!c.active || lambda[i] == 0.0) continue;
    std::fill(term.begin(), term.end(), 0.0);
    c.hessian.multiply_add(x.first(problem.z_dim), 2.0, term);
    for (std::size_t p = 0; p < c.linear.nnz(); ++p) term[c.linear.index[p]] += c.linear.value[p];
    for (int j = 0; j < problem.x_dim; ++j) {
      largest = std::max(largest, std::abs(lambda[i] * term[j]));
      g[j] += lambda[i] * term[j];
    }
    comp = std::max(comp, std::abs(lambda[i] * c.evaluate(x)));
    lam_max = std::max(lam_max, lambda[i]);
  }
  std::vector<bool> bounded(problem.x_dim, false);
  for (const int j : problem.nonneg) bounded[j] = true;
  double stat = 0.0;
  for (int j = 0; j < problem.x_dim; ++j) {
    // At an active bound x_j = 0 only a negative gradient is a violation.
    const double r = bounded[j] && x[j] <= 0.0 ? std::max(0.0, -g[j]) : std::abs(g[j]);
    stat = std::max(stat, r);
  }
  KktResidual out;
  out.stationarity_raw = stat;
  out.complementarity_raw = comp;
  out.stationarity = stat / (1.0 + largest);
  out.complementarity = comp / (1.0 + lam_max);
  out.feasibility = true_violation(problem, x).magnitude;
  return out;
}

DcaResult dca_solve(const QclpProblem& problem, std::span<const SplitConstraint> splits,
                    const DcaParams& params, const DcaStart& start) {
  params.validate();
  if (splits.size() != problem.num_rows()) throw DimensionError("one split per row required");

  Vector x = start.x.empty() ? problem.x0 : start.x;
  if (static_cast<int>(x.size()) != problem.x_dim) throw DimensionError("x0 length mismatch");
  for (const double v : x) {
    if (!std::isfinite(v)) throw SolverError("x0 is not finite");
  }
  Vector lambda = start.lambda;
  if (!lambda.empty() && lambda.size() != problem.num_rows()) lambda.clear();

  InnerOptions inner;
  inner.max_iters = params.inner_iters;
  inner.tol = params.inner_tol;
  inner.precondition = params.precondition;

  DcaResult res;
  double beta = start.beta > 0.0 ? start.beta : params.beta0;
  double best_violation = kUnbounded;
  Vector best_x = x;
  Vector best_lambda = lambda;
  double best_beta = beta;
  const int n_op = problem.num_operational();

  for (int k = 0; k < params.max_outer; ++k) {
    InnerSolution sol;
    try {
      const LiftedProblem lp = linearize(problem, splits, x, beta, params.eps);
      sol = solve_inner(lp, lambda, inner);
    } catch (const SolverError& e) {
      res.status = DcaStatus::InnerFailure;
      res.message = e.what();
      break;
    }

    DcaRecord rec;
    rec.k = k;
    rec.beta = beta;
    rec.inner_iters = sol.iterations;
    rec.inner_value = sol.dual_value;
    rec.inner_primal = sol.primal_value;
    for (int i = 0; i < n_op; ++i) rec.t_inner = std::max(rec.t_inner, sol.t[i] / beta);
    rec.objective = objective(problem, sol.x);
    rec.t_actual = true_violation(problem, sol.x).magnitude;
    double dx = 0.0;
    for (int j = 0; j < problem.x_dim; ++j) dx += (sol.x[j] - x[j]) * (sol.x[j] - x[j]);
    rec.dx_norm = std::sqrt(dx);
    if (!std::isfinite(rec.objective) || !std::isfinite(rec.dx_norm)) {
      res.status = DcaStatus::InnerFailure;
      res.message = "non-finite iterate";
      res.history.push_back(rec);
      break;
    }
    res.history.push_back(rec);

    x = std::move(sol.x);
    lambda = std::move(sol.lambda);
    if (rec.t_actual < best_violation) {
      best_violation = rec.t_actual;
      best_x = x;
      best_lambda = lambda;
      best_beta = beta;
    }
    if (rec.dx_norm <= params.eps_x && rec.t_inner <= params.eps_t &&
        rec.t_actual <= params.eps_t) {
      res.status = DcaStatus::Converged;
      best_x = x;
      best_lambda = lambda;
      best_beta = beta;
      break;
    }

    double lam_norm = 0.0;
    for (int i = 0; i < n_op; ++i) lam_norm += beta * lambda[i];
    const double r = std::min(rec.dx_norm > 0.0 ? 1.0 / rec.dx_norm : kUnbounded,
                              lam_norm + params.delta1);
    if (beta < r) beta += params.delta2;
  }

  res.outer_iters = static_cast<int>(res.history.size());
  if (res.status == DcaStatus::Converged || res.status == DcaStatus::IterLimit) {
    res.x = std::move(best_x);
    res.lambda = std::move(best_lambda);
  } else {
    res.x = std::move(x);
    res.lambda = std::move(lambda);
    best_beta = beta;
  }
  res.objective = objective(problem, res.x);
  res.max_violation = true_violation(problem, res.x).magnitude;
  res.beta = best_beta;
  if (!res.lambda.empty()) {
    res.lambda_orig = res.lambda;
    for (int i = 0; i < n_op; ++i) res.lambda_orig[i] *= best_beta;
  }
  return res;
}

void write_history_csv(std::ostream& out, const std::vector<DcaRecord>& history) {
  out << "k,objective,t_inner,t_actual,dx_norm,beta,inner_iters\n";
  out.precision(12);
  for (const auto& r : history) {
    out << r.k << ',' << r.objective << ',' << r.t_inner << ',' << r.t_actual << ','
        << r.dx_norm << ',' << r.beta << ',' << r.inner_iters << '\n';
  }
}

}  // namespace dcflow
