#pragma once

#include <span>
#include <string>
#include <vector>

#include "dcflow/grid.hpp"
#include "dcflow/sparse.hpp"

namespace dcflow {

enum class ConstraintKind {
  PowerUpperP,
  PowerLowerP,
  PowerUpperQ,
  PowerLowerQ,
  VoltUpper,
  VoltLower,
  Line,
  CostSlack,
};

const char* to_string(ConstraintKind kind);

/// Row  x^T P x + p^T x + omega <= 0  over x = [z; u], z = [Re dv; Im dv].
/// P acts on the z-block only.
struct QuadraticConstraint {
  ConstraintKind kind = ConstraintKind::VoltUpper;
  int element = 0;  ///< Bus index, or branch index for Line rows.
  SymmetricSparse hessian;
  SparseVector linear;
  double constant = 0.0;
  /// The bound the row encodes (v_max, v_min, i_max, p/q limit); used to
  /// report violations in natural units.
  double limit = 0.0;
  /// False when the limit is infinite; the row is kept for layout only.
  bool active = true;
  /// CostSlack rows: index of the power row sharing the same quadratic part.
  int parent = -1;
  /// CostSlack rows: position of the row's own slack variable in x.
  int slack = -1;

  double evaluate(std::span<const double> x) const;
};

struct LineData {
  int from = 0;
  int to = 0;
  double admittance_sq = 0.0;  ///< |y_jl|^2
};

/// min c^T x  s.t.  rows_i(x) <= 0,  x_j >= 0 for j in nonneg.
/// Row layout: per bus k, rows 6k..6k+5 are (PowerUpperP, PowerLowerP,
/// PowerUpperQ, PowerLowerQ, VoltUpper, VoltLower); then one Line row per
/// branch; then per bus k four CostSlack rows (+dp, -dp, +dq, -dq).
struct QclpProblem {
  int num_buses = 0;
  int num_lines = 0;
  int z_dim = 0;  ///< 2M
  int x_dim = 0;  ///< 2M + 4M slacks
  Vector cost;
  std::vector<QuadraticConstraint> constraints;
  std::vector<int> nonneg;
  Vector x0;
  std::vector<LineData> lines;

  int num_operational() const { return 6 * num_buses + num_lines; }
  bool is_operational(int i) const { return i < num_operational(); }
  std::size_t num_rows() const { return constraints.size(); }
};

struct PowerHessians {
  SymmetricSparse active;    ///< sym(H_r,k)
  SymmetricSparse reactive;  ///< sym(H_q,k)
};

struct PowerLinearParts {
  SparseVector active;  ///< h_r,k
  SparseVector reactive;
};

struct PowerDelta {
  Vector p;
  Vector q;
};

PowerHessians power_hessians(const SparseComplexMatrix& y, int k);
PowerLinearParts power_linear_parts(const SparseComplexMatrix& y, std::span<const Complex> v0,
                                    int k);

/// Change of bus powers caused by dv, evaluated through the quadratic forms.
PowerDelta delta_power(std::span<const double> z, const SparseComplexMatrix& y,
                       std::span<const Complex> v0);

/// Builds the QCLP for the minimal-deviation OPF around `op0`.
/// `kirchhoff_tol` bounds the allowed mismatch of op0 against its voltages.
QclpProblem assemble_qclp(const GridModel& grid, const OperatingPoint& op0,
                          double kirchhoff_tol = 1e-8);
QclpProblem assemble_qclp(const GridModel& grid, const SparseComplexMatrix& y,
                          const OperatingPoint& op0, double kirchhoff_tol = 1e-8);

Vector evaluate_constraints(const QclpProblem& problem, std::span<const double> x);

/// Objective value c^T x.
double objective(const QclpProblem& problem, std::span<const double> x);

/// Slack block that makes every cost row tight at z: u = (dp)+, (-dp)+, ...
Vector with_tight_slacks(const QclpProblem& problem, std::span<const double> z);

/// Diagnostic dump (constraint kinds, nnz counts). Not a stable format.
std::string qclp_diagnostics_json(const QclpProblem& problem);

}  // namespace dcflow
