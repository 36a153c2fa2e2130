#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "dcflow/dc_split.hpp"
#include "dcflow/inner_solver.hpp"
#include "dcflow/qclp.hpp"

namespace dcflow {

struct DcaParams {
  double beta0 = 1.0;
  double delta1 = 1.0;
  double delta2 = 1.0;
  double eps_x = 1e-4;
  double eps_t = 1e-4;
  int max_outer = 200;
  int inner_iters = 1000;
  double inner_tol = 1e-8;
  double eps = 1e-8;  ///< dual denominator regularization
  bool precondition = true;  ///< diagonal scaling in the inner solver
  void validate() const;
};

/// Cap used when the caller does not choose one: 100 for small grids, 1000 otherwise.
int default_inner_iters(int num_buses);

struct DcaRecord {
  int k = 0;
  double objective = 0.0;  ///< c^T x at the new iterate
  double t_inner = 0.0;    ///< max unscaled slack of the convexified operational rows
  double t_actual = 0.0;   ///< max violation of the original rows, p.u. magnitude
  double dx_norm = 0.0;
  double beta = 0.0;       ///< penalty used for this subproblem
  int inner_iters = 0;
  double inner_value = 0.0;  ///< dual value of the subproblem
  double inner_primal = 0.0;
};

enum class DcaStatus { Converged, IterLimit, InnerFailure };
const char* to_string(DcaStatus status);

struct DcaResult {
  Vector x;
  double objective = 0.0;
  double max_violation = 0.0;  ///< p.u. magnitude
  int outer_iters = 0;
  std::vector<DcaRecord> history;
  DcaStatus status = DcaStatus::IterLimit;
  std::string message;
  Vector lambda;       ///< box multipliers of the last subproblem
  Vector lambda_orig;  ///< multipliers of the original rows (beta applied)
  double beta = 0.0;   ///< penalty of the returned iterate
  int total_inner_iters() const;
};

/// Warm-start state; either part may be empty.
struct DcaStart {
  Vector x;
  Vector lambda;
  double beta = 0.0;  ///< penalty to start from; 0 means params.beta0
};

DcaResult dca_solve(const QclpProblem& problem, std::span<const SplitConstraint> splits,
                    const DcaParams& params = {}, const DcaStart& start = {});

struct Violation {
  double squared = 0.0;    ///< max (row)+ in the rows' own units
  double magnitude = 0.0;  ///< same, converted to p.u. voltage/current/power
  int row = -1;
};

/// Operational rows only.
Violation true_violation(const QclpProblem& problem, std::span<const double> x);

/// Converts a positive row value to a p.u. magnitude for its kind.
double violation_magnitude(const QuadraticConstraint& c, double row_value);

struct KktResidual {
  double stationarity = 0.0;   ///< scaled by 1 + largest gradient term
  double complementarity = 0.0;  ///< scaled by 1 + max multiplier
  double feasibility = 0.0;
  double stationarity_raw = 0.0;
  double complementarity_raw = 0.0;
};

/// lambda holds the multipliers of all original rows.
KktResidual kkt_residual(const QclpProblem& problem, std::span<const double> x,
                         std::span<const double> lambda);

void write_history_csv(std::ostream& out, const std::vector<DcaRecord>& history);

}  // namespace dcflow
