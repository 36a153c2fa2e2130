#include "dcflow/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "dcflow/dc_split.hpp"
#include "dcflow/errors.hpp"
#include "dcflow/inner_solver.hpp"
#include "dcflow/perturb.hpp"
#include "dcflow/power_flow.hpp"
#include "dcflow/qclp.hpp"
#include "json.hpp"

namespace dcflow {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DimensionError("need two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw ModelError("log-log fit needs positive values");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw ModelError("log-log fit needs distinct sizes");
  return (n * sxy - sx * sy) / den;
}

ScalingPoint measure_inner(const ScalingCase& c, int iterations, int repeats,
                           const MemoryProbe& probe) {
  if (iterations < 1 || repeats < 1) throw SolverError("iterations and repeats must be >= 1");
  ScalingPoint pt;
  pt.name = c.name;
  pt.buses = c.grid.num_buses();
  pt.lines = static_cast<int>(c.grid.branches.size());
  pt.size = pt.buses + pt.lines;
  pt.iterations = iterations;

  const auto pf = solve_power_flow(c.grid);
  if (!pf.converged) throw ModelError(c.name + ": power flow did not converge");
  PerturbSpec spec;
  spec.magnitude = 0.02;
  const OperatingPoint op = perturb(pf.point, c.grid, spec).point;

  InnerOptions opts;
  opts.max_iters = iterations;
  opts.tol = -1.0;  // never stop early; every run does the same work

  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < repeats; ++r) {
    if (probe.reset) probe.reset();
    const auto y = build_admittance(c.grid);
    const QclpProblem qp = assemble_qclp(c.grid, y, op, kUnbounded);
    const auto splits = split_all(qp, y);
    const Vector x0 = with_tight_slacks(qp, Vector(qp.z_dim, 0.0));
    const LiftedProblem lp = linearize(qp, splits, x0, 1.0);
    const Vector lambda0(lp.num_rows, 0.0);
    const auto start = std::chrono::steady_clock::now();
    const InnerSolution sol = solve_inner(lp, lambda0, opts);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    best = std::min(best, secs / sol.iterations);
    if (probe.peak_bytes) pt.peak_bytes = std::max(pt.peak_bytes, probe.peak_bytes());
  }
  pt.seconds_per_iter = best;
  return pt;
}

ScalingReport measure_scaling(const std::vector<ScalingCase>& cases, int iterations, int repeats,
                              const MemoryProbe& probe) {
  ScalingReport rep;
  std::vector<double> size, time, mem;
  for (const auto& c : cases) {
    rep.points.push_back(measure_inner(c, iterations, repeats, probe));
    const auto& p = rep.points.back();
    size.push_back(p.size);
    time.push_back(p.seconds_per_iter);
    mem.push_back(static_cast<double>(p.peak_bytes));
  }
  if (rep.points.size() >= 2) {
    rep.time_slope = loglog_slope(size, time);
    if (probe.peak_bytes) rep.memory_slope = loglog_slope(size, mem);
  }
  return rep;
}

std::string scaling_to_json(const ScalingReport& report) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : report.points) {
    pts.push_back({{"name", p.name},
                   {"buses", p.buses},
                   {"lines", p.lines},
                   {"size", p.size},
                   {"iterations", p.iterations},
                   {"seconds_per_iter", p.seconds_per_iter},
                   {"peak_bytes", p.peak_bytes}});
  }
  nlohmann::json doc = {{"points", pts},
                        {"time_slope", report.time_slope},
                        {"memory_slope", report.memory_slope}};
  return doc.dump(2);
}

}  // namespace dcflow
