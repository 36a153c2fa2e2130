#include "dcflow/perturb.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "dcflow/errors.hpp"
#include "dcflow/power_flow.hpp"
#include "json.hpp"

namespace dcflow {

Violation point_violation(const GridModel& grid, const SparseComplexMatrix& y,
                          const OperatingPoint& op) {
  // The QCLP at op evaluated at dx = 0 is exactly the limit check at op.
  const QclpProblem qp = assemble_qclp(grid, y, op, kUnbounded);
  return true_violation(qp, Vector(qp.x_dim, 0.0));
}

ReferencePoint reference_operating_point(const GridModel& grid, const DcaParams& params) {
  const auto y = build_admittance(grid);
  ComplexVector schedule(grid.buses.size());
  for (std::size_t k = 0; k < grid.buses.size(); ++k) {
    schedule[k] = Complex(grid.buses[k].p_set, grid.buses[k].q_set);
  }
  const auto pf = solve_power_flow(grid, y, schedule, {});
  if (!pf.converged) throw ModelError("power flow did not converge");

  ReferencePoint ref;
  ref.point = pf.point;
  ref.power_flow_iters = pf.iterations;
  ref.violation = point_violation(grid, y, ref.point).magnitude;
  if (ref.violation <= 0.0) return ref;

  const QclpProblem qp = assemble_qclp(grid, y, ref.point);
  const auto splits = split_all(qp, y);
  const DcaResult res = dca_solve(qp, splits, params);
  ref.dca_outer_iters = res.outer_iters;
  const int m = grid.num_buses();
  for (int k = 0; k < m; ++k) ref.point.v[k] += Complex(res.x[k], res.x[m + k]);
  ref.point.s = power_injections(y, ref.point.v);
  ref.violation = point_violation(grid, y, ref.point).magnitude;
  return ref;
}

ReferencePoint load_reference_point(const std::string& path, const GridModel& grid) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  Vector re, im;
  try {
    const auto doc = nlohmann::json::parse(in);
    re = doc.at("v_re").get<Vector>();
    im = doc.at("v_im").get<Vector>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
  if (re.size() != grid.buses.size() || im.size() != grid.buses.size()) {
    throw DimensionError(path + ": one voltage per bus required");
  }
  const auto y = build_admittance(grid);
  ReferencePoint ref;
  ref.point.v.resize(re.size());
  for (std::size_t k = 0; k < re.size(); ++k) ref.point.v[k] = Complex(re[k], im[k]);
  ref.point.s = power_injections(y, ref.point.v);
  ref.violation = point_violation(grid, y, ref.point).magnitude;
  return ref;
}

namespace {

OperatingPoint apply_delta(const OperatingPoint& op, const SparseComplexMatrix& y,
                           const std::vector<Complex>& unit, double m) {
  OperatingPoint out;
  out.v.resize(op.v.size());
  for (std::size_t k = 0; k < op.v.size(); ++k) out.v[k] = op.v[k] * (1.0 + m * unit[k]);
  out.s = power_injections(y, out.v);
  return out;
}

}  // namespace

PerturbResult perturb(const OperatingPoint& op, const GridModel& grid, const PerturbSpec& spec) {
  if (op.v.size() != grid.buses.size()) throw DimensionError("operating point size mismatch");
  if (spec.magnitude < 0.0) throw ModelError("perturbation magnitude must be >= 0");
  const auto y = build_admittance(grid);

  // One draw in [-1, 1]; the magnitude scales it so bisection keeps the direction.
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Complex> unit(op.v.size());
  for (auto& u : unit) {
    const double re = dist(rng);
    const double im = dist(rng);
    u = Complex(re, im);
  }

  PerturbResult res;
  if (!spec.target_violation) {
    res.magnitude = spec.magnitude;
    res.point = spec.magnitude == 0.0 ? op : apply_delta(op, y, unit, spec.magnitude);
    res.violation = point_violation(grid, y, res.point).magnitude;
    return res;
  }

  const double target = *spec.target_violation;
  if (!(target > 0.0)) throw ModelError("target violation must be positive");
  auto violation_at = [&](double m) {
    return point_violation(grid, y, apply_delta(op, y, unit, m)).magnitude;
  };
  double lo = 0.0;
  double hi = spec.magnitude > 0.0 ? spec.magnitude : 1e-3;
  double v_hi = violation_at(hi);
  for (int i = 0; i < 60 && v_hi < target; ++i) {
    lo = hi;
    hi *= 2.0;
    v_hi = violation_at(hi);
  }
  if (v_hi < target) throw ModelError("could not reach the target violation");
  double mid = hi;
  double v_mid = v_hi;
  for (int i = 0; i < 100 && std::abs(v_mid - target) > 0.1 * target; ++i) {
    mid = 0.5 * (lo + hi);
    v_mid = violation_at(mid);
    if (v_mid < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  res.magnitude = mid;
  res.point = apply_delta(op, y, unit, mid);
  res.violation = v_mid;
  return res;
}

}  // namespace dcflow
