#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "dcflow/grid.hpp"

namespace dcflow {

/// Heap accounting supplied by the executable, which owns operator new.
/// Both callbacks may be empty; peak memory is then reported as zero.
struct MemoryProbe {
  std::function<void()> reset;             ///< start a new peak window
  std::function<std::size_t()> peak_bytes; ///< peak live bytes since reset
};

struct ScalingCase {
  std::string name;
  GridModel grid;
};

struct ScalingPoint {
  std::string name;
  int buses = 0;
  int lines = 0;
  int size = 0;  ///< M + L
  int iterations = 0;
  double seconds_per_iter = 0.0;
  std::size_t peak_bytes = 0;  ///< assembly, split, linearization and inner solve
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  double time_slope = 0.0;    ///< log-log slope of seconds_per_iter vs size
  double memory_slope = 0.0;  ///< log-log slope of peak_bytes vs size
};

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Times a fixed number of inner iterations on the subproblem linearized at a
/// perturbed power-flow point. The best of `repeats` runs is kept.
ScalingPoint measure_inner(const ScalingCase& c, int iterations, int repeats = 3,
                           const MemoryProbe& probe = {});

ScalingReport measure_scaling(const std::vector<ScalingCase>& cases, int iterations,
                              int repeats = 3, const MemoryProbe& probe = {});

std::string scaling_to_json(const ScalingReport& report);

}  // namespace dcflow
