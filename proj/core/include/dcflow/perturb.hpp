#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dcflow/dca.hpp"
#include "dcflow/grid.hpp"

namespace dcflow {

/// Largest violation of the grid limits at a Kirchhoff-consistent point,
/// in p.u. magnitude (power, voltage, or current).
Violation point_violation(const GridModel& grid, const SparseComplexMatrix& y,
                          const OperatingPoint& op);

struct ReferencePoint {
  OperatingPoint point;
  int power_flow_iters = 0;
  int dca_outer_iters = 0;  ///< 0 when the power-flow point was already feasible
  double violation = 0.0;
};

/// Power-flow solution of the scheduled injections; if it breaks any limit,
/// a DCA solve started there moves it back inside.
ReferencePoint reference_operating_point(const GridModel& grid, const DcaParams& params = {});

/// Reads {"v_re": [...], "v_im": [...]} in bus order; s follows from Kirchhoff.
ReferencePoint load_reference_point(const std::string& path, const GridModel& grid);

struct PerturbSpec {
  std::uint64_t seed = 1;
  double magnitude = 0.0;
  std::optional<double> target_violation;
};

struct PerturbResult {
  OperatingPoint point;
  double magnitude = 0.0;  ///< the one actually used
  double violation = 0.0;
};

/// v~ = v .* (1 + delta), Re/Im delta uniform in [-m, m]; s~ from Kirchhoff.
/// With a target violation, m is bracketed and bisected until the violation
/// is within 10% of the target.
PerturbResult perturb(const OperatingPoint& op, const GridModel& grid, const PerturbSpec& spec);

}  // namespace dcflow
