#pragma once

#include <span>

#include "dcflow/grid.hpp"

namespace dcflow {

struct PowerFlowOptions {
  int max_iters = 30;
  double tol = 1e-10;  ///< Max-norm power mismatch (p.u.).
};

struct PowerFlowResult {
  OperatingPoint point;
  int iterations = 0;
  double mismatch = 0.0;
  bool converged = false;
};

/// Newton-Raphson power flow in polar coordinates. PQ buses fix s, PV buses
/// fix Re(s) and |v| = v_set, the slack fixes v = v_set at angle zero.
/// `schedule` gives the withdrawn power per bus; entries for the slack (and
/// Im for PV buses) are ignored.
PowerFlowResult solve_power_flow(const GridModel& grid, const SparseComplexMatrix& y,
                                 std::span<const Complex> schedule,
                                 const PowerFlowOptions& options = {},
                                 std::span<const Complex> initial = {});

/// Power flow with each bus's own (p_set, q_set) schedule.
PowerFlowResult solve_power_flow(const GridModel& grid, const PowerFlowOptions& options = {});

}  // namespace dcflow
