#pragma once

#include <cstdint>

#include "dcflow/grid.hpp"

namespace dcflow {

/// Radial medium-voltage feeder: a trunk from the slack bus with laterals
/// hanging off it. Every non-slack bus is a PQ bus with zero schedule.
struct FeederSpec {
  int num_buses = 18;
  int trunk_length = 0;     ///< buses on the trunk after the slack; 0 picks sqrt(num_buses)
  double r = 0.0225;        ///< per-segment series resistance (p.u.)
  double x = 0.0125;        ///< per-segment series reactance (p.u.)
  double v_min = 0.9;
  double v_max = 1.07;
  double slack_voltage = 1.0;
  double i_max = kUnbounded;
  std::uint64_t seed = 1;   ///< jitters segment impedances by +-20% when nonzero
};

GridModel radial_feeder(const FeederSpec& spec);

}  // namespace dcflow
