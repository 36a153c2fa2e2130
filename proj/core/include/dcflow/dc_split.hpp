#pragma once

#include <span>
#include <vector>

#include "dcflow/qclp.hpp"
#include "dcflow/sparse.hpp"

namespace dcflow {

/// Nonzero eigenvalues of a symmetrized power Hessian. Both have
/// multiplicity two; every other eigenvalue is zero.
struct ArrowheadEigs {
  double plus = 0.0;
  double minus = 0.0;
  double magnitude = 0.0;  ///< max(|plus|, |minus|)
};

struct PowerEigs {
  ArrowheadEigs active;    ///< sym(H_r,k)
  ArrowheadEigs reactive;  ///< sym(H_q,k)
};

/// Closed-form spectrum from row k of Y in O(deg(k)).
///
/// With the bus's own coordinates (Re dv_k, Im dv_k) first, sym(H) has the
/// block form [d I, E; E^T, 0] with E E^T = (1/4) sum_{j != k} |Y_kj|^2 I,
/// so its nonzero eigenvalues solve lambda^2 - d lambda - |E|^2 = 0:
///   lambda = (d +- sqrt(d^2 + sum_{j != k} |Y_kj|^2)) / 2,
/// with d = Re(Y_kk) for the active and d = -Im(Y_kk) for the reactive part.
PowerEigs analytic_power_eigs(const SparseComplexMatrix& y, int k);

/// How alpha is chosen for power rows.
enum class SplitBound {
  Exact,       ///< analytic_power_eigs magnitude (tight)
  RowNorm,     ///< ||Y^(k)||_2, always >= the exact magnitude
  Gershgorin,  ///< max absolute row sum of P, always safe
};

struct SplitOptions {
  SplitBound bound = SplitBound::Exact;
  /// Relative headroom added to alpha; keeps alpha*D - P PSD under rounding.
  double relative_margin = 1e-12;
};

double constraint_alpha(const QuadraticConstraint& c, const QclpProblem& problem,
                        const SparseComplexMatrix& y, const SplitOptions& options = {});

/// P = P+ - P-  with  P+ = alpha * D  and  P- = alpha * D - P, where D is the
/// 0/1 diagonal on the z-block support of (P, p).
struct SplitConstraint {
  int row = 0;
  double alpha = 0.0;
  std::vector<int> support;

  /// out += scale * P- z
  void concave_multiply_add(const QuadraticConstraint& c, std::span<const double> z,
                            double scale, std::span<double> out) const;
  /// z^T P- z
  double concave_form(const QuadraticConstraint& c, std::span<const double> z) const;
  /// z^T P+ z
  double convex_form(std::span<const double> z) const;
};

/// Throws SplitError unless alpha * D - P is positive semidefinite.
SplitConstraint split(const QuadraticConstraint& c, double alpha, int row = 0);

/// Splits every row; cost rows reuse the alpha of their parent power row.
std::vector<SplitConstraint> split_all(const QclpProblem& problem, const SparseComplexMatrix& y,
                                       const SplitOptions& options = {});

}  // namespace dcflow
