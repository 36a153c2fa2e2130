#pragma once

#include <cstdint>
#include <string>

#include "dcflow/grid.hpp"

namespace dcflow {

// Production-path results compared against the dense oracle. Each check
// reports the worst discrepancy it saw; the caller picks the tolerance.

struct EigenCheck {
  int matrices = 0;
  double max_rel_error = 0.0;     ///< analytic vs Jacobi, largest |eigenvalue|
  double min_concave_eig = kUnbounded;  ///< smallest eigenvalue of alpha D - P over all rows
};

/// Every power Hessian of the grid, and the concave part of every split row
/// of the QCLP at the power-flow point.
EigenCheck check_power_eigs(const GridModel& grid);

/// Largest |delta_power - dense Kirchhoff difference| over random z whose
/// entries are uniform in [-scale, scale], at the power-flow point.
double check_delta_power(const GridModel& grid, int samples, std::uint64_t seed,
                         double scale = 0.1);

/// Largest |sparse - dense| constraint value relative to max(1, |dense|)
/// over random x.
double check_constraint_eval(const GridModel& grid, int samples, std::uint64_t seed);

/// Largest ||grad - central difference||_inf / ||grad||_inf over random
/// lambda in [0, 1] on the lifted problem at a perturbed power-flow point.
double check_dual_gradient(const GridModel& grid, int samples, std::uint64_t seed,
                           double h = 1e-6);

struct VerifyReport {
  EigenCheck eigs;
  double delta_power = 0.0;
  double constraint_eval = 0.0;
  double dual_gradient = 0.0;
  bool passed = false;
};

/// All checks with the project tolerances: eigenvalues 1e-9 relative,
/// concave part >= -1e-10, power and constraint values 1e-10, gradient 1e-5.
VerifyReport verify_grid(const GridModel& grid, std::uint64_t seed = 1);

std::string verify_to_json(const VerifyReport& report);

}  // namespace dcflow
