#include "dcflow/dc_split.hpp"

#include <algorithm>
#include <cmath>

#include "dcflow/errors.hpp"

namespace dcflow {
namespace {

ArrowheadEigs arrowhead(double d, double off_sq) {
  const double root = std::sqrt(d * d + off_sq);
  ArrowheadEigs e;
  // Avoid cancellation in the small root: plus * minus = -off_sq / 4.
  if (d >= 0.0) {
    e.plus = 0.5 * (d + root);
    e.minus = e.plus > 0.0 ? -0.25 * off_sq / e.plus : 0.0;
  } else {
    e.minus = 0.5 * (d - root);
    e.plus = -0.25 * off_sq / e.minus;
  }
  e.magnitude = std::max(std::abs(e.plus), std::abs(e.minus));
  return e;
}

double gershgorin(const SymmetricSparse& p) {
  std::vector<double> row_sum(static_cast<std::size_t>(p.dim), 0.0);
  for (std::size_t i = 0; i < p.nnz(); ++i) row_sum[p.row[i]] += std::abs(p.value[i]);
  return row_sum.empty() ? 0.0 : *std::max_element(row_sum.begin(), row_sum.end());
}

bool is_power_row(ConstraintKind k) {
  return k == ConstraintKind::PowerUpperP || k == ConstraintKind::PowerLowerP ||
         k == ConstraintKind::PowerUpperQ || k == ConstraintKind::PowerLowerQ;
}

bool is_reactive(ConstraintKind k) {
  return k == ConstraintKind::PowerUpperQ || k == ConstraintKind::PowerLowerQ;
}

// In-place Cholesky of a small dense matrix; false if not positive definite.
bool cholesky_ok(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (!(diag > 0.0)) return false;
    const double l = std::sqrt(diag);
    a[j * n + j] = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / l;
    }
  }
  return true;
}

}  // namespace

PowerEigs analytic_power_eigs(const SparseComplexMatrix& y, int k) {
  const auto cols = y.row_cols(k);
  const auto vals = y.row_values(k);
  Complex diag{};
  double off_sq = 0.0;
  for (std::size_t p = 0; p < cols.size(); ++p) {
    if (cols[p] == k) {
      diag = vals[p];
    } else {
      off_sq += std::norm(vals[p]);
    }
  }
  return {arrowhead(diag.real(), off_sq), arrowhead(-diag.imag(), off_sq)};
}

double constraint_alpha(const QuadraticConstraint& c, const QclpProblem& problem,
                        const SparseComplexMatrix& y, const SplitOptions& options) {
  switch (c.kind) {
    case ConstraintKind::VoltUpper:
    case ConstraintKind::VoltLower:
      return 1.0;
    case ConstraintKind::Line:
      return 2.0 * problem.lines.at(c.element).admittance_sq;
    case ConstraintKind::CostSlack:
      return constraint_alpha(problem.constraints.at(c.parent), problem, y, options);
    default:
      break;
  }
  if (!is_power_row(c.kind)) throw SplitError("unknown constraint kind");
  double alpha = 0.0;
  switch (options.bound) {
    case SplitBound::Exact: {
      const auto eigs = analytic_power_eigs(y, c.element);
      alpha = is_reactive(c.kind) ? eigs.reactive.magnitude : eigs.active.magnitude;
      break;
    }
    case SplitBound::RowNorm: {
      double sq = 0.0;
      for (const auto& v : y.row_values(c.element)) sq += std::norm(v);
      alpha = std::sqrt(sq);
      break;
    }
    case SplitBound::Gershgorin:
      alpha = gershgorin(c.hessian);
      break;
  }
  return alpha * (1.0 + options.relative_margin);
}

SplitConstraint split(const QuadraticConstraint& c, double alpha, int row) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw SplitError("alpha must be finite and >= 0");
  const int z_dim = c.hessian.dim;
  SplitConstraint s;
  s.row = row;
  s.alpha = alpha;
  s.support = c.hessian.support();
  for (const int i : c.linear.index) {
    if (i < z_dim) s.support.push_back(i);
  }
  std::sort(s.support.begin(), s.support.end());
  s.support.erase(std::unique(s.support.begin(), s.support.end()), s.support.end());

  // alpha*I - P restricted to the support must be PSD.
  const std::size_t n = s.support.size();
  if (c.hessian.nnz() > 0) {
    std::vector<int> local(static_cast<std::size_t>(z_dim), -1);
    for (std::size_t i = 0; i < n; ++i) local[s.support[i]] = static_cast<int>(i);
    std::vector<double> a(n * n, 0.0);
    const double shift = 1e-12 * std::max(1.0, alpha);
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] = alpha + shift;
    for (std::size_t p = 0; p < c.hessian.nnz(); ++p) {
      a[local[c.hessian.row[p]] * n + local[c.hessian.col[p]]] -= c.hessian.value[p];
    }
    if (!cholesky_ok(a, n)) {
      throw SplitError("alpha " + std::to_string(alpha) +
                       " is below the spectral radius of the constraint Hessian");
    }
  }
  return s;
}

std::vector<SplitConstraint> split_all(const QclpProblem& problem, const SparseComplexMatrix& y,
                                       const SplitOptions& options) {
  std::vector<SplitConstraint> out;
  out.reserve(problem.constraints.size());
  std::vector<double> alpha(problem.constraints.size(), 0.0);
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& c = problem.constraints[i];
    alpha[i] = c.kind == ConstraintKind::CostSlack ? alpha.at(c.parent)
                                                   : constraint_alpha(c, problem, y, options);
    out.push_back(split(c, alpha[i], static_cast<int>(i)));
  }
  return out;
}

void SplitConstraint::concave_multiply_add(const QuadraticConstraint& c,
                                           std::span<const double> z, double scale,
                                           std::span<double> out) const {
  for (const int j : support) out[j] += scale * alpha * z[j];
  c.hessian.multiply_add(z, -scale, out);
}

double SplitConstraint::concave_form(const QuadraticConstraint& c,
                                     std::span<const double> z) const {
  return convex_form(z) - c.hessian.quadratic_form(z);
}

double SplitConstraint::convex_form(std::span<const double> z) const {
  double acc = 0.0;
  for (const int j : support) acc += z[j] * z[j];
  return alpha * acc;
}

}  // namespace dcflow
