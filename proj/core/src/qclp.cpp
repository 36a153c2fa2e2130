#include "dcflow/qclp.hpp"

#include <cmath>
#include <map>

#include "dcflow/errors.hpp"
#include "json.hpp"

namespace dcflow {

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::PowerUpperP: return "power_upper_p";
    case ConstraintKind::PowerLowerP: return "power_lower_p";
    case ConstraintKind::PowerUpperQ: return "power_upper_q";
    case ConstraintKind::PowerLowerQ: return "power_lower_q";
    case ConstraintKind::VoltUpper: return "volt_upper";
    case ConstraintKind::VoltLower: return "volt_lower";
    case ConstraintKind::Line: return "line";
    case ConstraintKind::CostSlack: return "cost_slack";
  }
  return "unknown";
}

double QuadraticConstraint::evaluate(std::span<const double> x) const {
  return hessian.quadratic_form(x) + linear.dot(x) + constant;
}

PowerHessians power_hessians(const SparseComplexMatrix& y, int k) {
  const int m = y.dim();
  const auto cols = y.row_cols(k);
  const auto vals = y.row_values(k);
  std::vector<Triplet<double>> hr, hq;
  hr.reserve(4 * cols.size());
  hq.reserve(4 * cols.size());
  for (std::size_t p = 0; p < cols.size(); ++p) {
    const int j = cols[p];
    const double g = vals[p].real();
    const double b = vals[p].imag();
    // H_r = [Re Y^(k), -Im Y^(k); Im Y^(k), Re Y^(k)]
    hr.push_back({k, j, g});
    hr.push_back({k, m + j, -b});
    hr.push_back({m + k, j, b});
    hr.push_back({m + k, m + j, g});
    // H_q = [-Im Y^(k), -Re Y^(k); Re Y^(k), -Im Y^(k)]
    hq.push_back({k, j, -b});
    hq.push_back({k, m + j, -g});
    hq.push_back({m + k, j, g});
    hq.push_back({m + k, m + j, -b});
  }
  return {SymmetricSparse::symmetrized(2 * m, std::move(hr)),
          SymmetricSparse::symmetrized(2 * m, std::move(hq))};
}

PowerLinearParts power_linear_parts(const SparseComplexMatrix& y, std::span<const Complex> v0,
                                    int k) {
  const int m = y.dim();
  if (static_cast<int>(v0.size()) != m) throw DimensionError("v0 length mismatch");
  const auto cols = y.row_cols(k);
  const auto vals = y.row_values(k);
  const double vr = v0[k].real();
  const double vq = v0[k].imag();
  Complex w{};  // (Y v0)_k
  for (std::size_t p = 0; p < cols.size(); ++p) w += vals[p] * v0[cols[p]];

  std::vector<std::pair<int, double>> hr, hq;
  hr.reserve(2 * cols.size() + 2);
  hq.reserve(2 * cols.size() + 2);
  for (std::size_t p = 0; p < cols.size(); ++p) {
    const int j = cols[p];
    const double g = vals[p].real();
    const double b = vals[p].imag();
    hr.emplace_back(j, vr * g + vq * b);
    hr.emplace_back(m + j, vq * g - vr * b);
    hq.emplace_back(j, vq * g - vr * b);
    hq.emplace_back(m + j, -vq * b - vr * g);
  }
  hr.emplace_back(k, w.real());
  hr.emplace_back(m + k, w.imag());
  hq.emplace_back(k, -w.imag());
  hq.emplace_back(m + k, w.real());
  return {SparseVector::from_pairs(std::move(hr)), SparseVector::from_pairs(std::move(hq))};
}

PowerDelta delta_power(std::span<const double> z, const SparseComplexMatrix& y,
                       std::span<const Complex> v0) {
  const int m = y.dim();
  if (static_cast<int>(z.size()) != 2 * m) throw DimensionError("z must have length 2M");
  PowerDelta d{Vector(m), Vector(m)};
  for (int k = 0; k < m; ++k) {
    const auto h = power_hessians(y, k);
    const auto lin = power_linear_parts(y, v0, k);
    d.p[k] = h.active.quadratic_form(z) + lin.active.dot(z);
    d.q[k] = h.reactive.quadratic_form(z) + lin.reactive.dot(z);
  }
  return d;
}

namespace {

SparseVector scaled(const SparseVector& v, double s) {
  SparseVector out = v;
  for (auto& x : out.value) x *= s;
  return out;
}

SparseVector with_entry(const SparseVector& v, int index, double value) {
  std::vector<std::pair<int, double>> pairs;
  pairs.reserve(v.nnz() + 1);
  for (std::size_t p = 0; p < v.nnz(); ++p) pairs.emplace_back(v.index[p], v.value[p]);
  pairs.emplace_back(index, value);
  return SparseVector::from_pairs(std::move(pairs));
}

}  // namespace

QclpProblem assemble_qclp(const GridModel& grid, const OperatingPoint& op0,
                          double kirchhoff_tol) {
  return assemble_qclp(grid, build_admittance(grid), op0, kirchhoff_tol);
}

QclpProblem assemble_qclp(const GridModel& grid, const SparseComplexMatrix& y,
                          const OperatingPoint& op0, double kirchhoff_tol) {
  const int m = grid.num_buses();
  const int nl = grid.num_branches();
  if (static_cast<int>(op0.v.size()) != m || static_cast<int>(op0.s.size()) != m) {
    throw DimensionError("operating point does not match grid size");
  }
  const ComplexVector s_check = power_injections(y, op0.v);
  for (int k = 0; k < m; ++k) {
    if (std::abs(s_check[k] - op0.s[k]) > kirchhoff_tol) {
      throw ModelError("operating point violates the Kirchhoff equations at bus " +
                       std::to_string(grid.buses[k].id));
    }
  }

  QclpProblem qp;
  qp.num_buses = m;
  qp.num_lines = nl;
  qp.z_dim = 2 * m;
  qp.x_dim = 6 * m;
  qp.cost.assign(qp.x_dim, 0.0);
  qp.x0.assign(qp.x_dim, 0.0);
  for (int j = qp.z_dim; j < qp.x_dim; ++j) {
    qp.cost[j] = 1.0;
    qp.nonneg.push_back(j);
  }
  qp.constraints.reserve(static_cast<std::size_t>(10 * m + nl));

  std::vector<PowerHessians> hess(m);
  std::vector<PowerLinearParts> lin(m);
  for (int k = 0; k < m; ++k) {
    const auto& bus = grid.buses[k];
    if (!(bus.v_min <= bus.v_max)) {
      throw ModelError("bus " + std::to_string(bus.id) + ": empty voltage box");
    }
    hess[k] = power_hessians(y, k);
    lin[k] = power_linear_parts(y, op0.v, k);
    const double p0 = op0.s[k].real();
    const double q0 = op0.s[k].imag();

    auto push = [&](ConstraintKind kind, SymmetricSparse h, SparseVector l, double omega,
                    double limit) {
      QuadraticConstraint c;
      c.kind = kind;
      c.element = k;
      c.hessian = std::move(h);
      c.linear = std::move(l);
      c.limit = limit;
      c.active = std::isfinite(omega);
      c.constant = c.active ? omega : 0.0;
      qp.constraints.push_back(std::move(c));
    };
    push(ConstraintKind::PowerUpperP, hess[k].active, lin[k].active, p0 - bus.p_max, bus.p_max);
    push(ConstraintKind::PowerLowerP, hess[k].active.negated(), scaled(lin[k].active, -1.0),
         bus.p_min - p0, bus.p_min);
    push(ConstraintKind::PowerUpperQ, hess[k].reactive, lin[k].reactive, q0 - bus.q_max,
         bus.q_max);
    push(ConstraintKind::PowerLowerQ, hess[k].reactive.negated(), scaled(lin[k].reactive, -1.0),
         bus.q_min - q0, bus.q_min);

    // |v0 + dv|^2 = dv_r^2 + dv_q^2 + 2 Re(v0) dv_r + 2 Im(v0) dv_q + |v0|^2
    const double vr = op0.v[k].real();
    const double vq = op0.v[k].imag();
    const double v0_sq = std::norm(op0.v[k]);
    auto diag = [&](double sign) {
      return SymmetricSparse::symmetrized(2 * m, {{k, k, sign}, {m + k, m + k, sign}});
    };
    auto volt_lin = [&](double sign) {
      return SparseVector::from_pairs({{k, sign * 2.0 * vr}, {m + k, sign * 2.0 * vq}});
    };
    push(ConstraintKind::VoltUpper, diag(1.0), volt_lin(1.0), v0_sq - bus.v_max * bus.v_max,
         bus.v_max);
    push(ConstraintKind::VoltLower, diag(-1.0), volt_lin(-1.0),
         bus.v_min > 0.0 ? bus.v_min * bus.v_min - v0_sq : -kUnbounded, bus.v_min);
  }

  for (int l = 0; l < nl; ++l) {
    const auto& br = grid.branches[l];
    const int j = br.from;
    const int o = br.to;
    const double y2 = std::norm(br.admittance());
    const Complex dv0 = op0.v[j] - op0.v[o];
    qp.lines.push_back({j, o, y2});

    QuadraticConstraint c;
    c.kind = ConstraintKind::Line;
    c.element = l;
    c.hessian = SymmetricSparse::symmetrized(2 * m, {{j, j, y2},
                                                      {o, o, y2},
                                                      {j, o, -y2},
                                                      {o, j, -y2},
                                                      {m + j, m + j, y2},
                                                      {m + o, m + o, y2},
                                                      {m + j, m + o, -y2},
                                                      {m + o, m + j, -y2}});
    c.linear = SparseVector::from_pairs({{j, 2.0 * y2 * dv0.real()},
                                         {o, -2.0 * y2 * dv0.real()},
                                         {m + j, 2.0 * y2 * dv0.imag()},
                                         {m + o, -2.0 * y2 * dv0.imag()}});
    c.limit = br.i_max;
    c.active = std::isfinite(br.i_max);
    c.constant = c.active ? y2 * std::norm(dv0) - br.i_max * br.i_max : 0.0;
    qp.constraints.push_back(std::move(c));
  }

  // |dp| + |dq| through two slacks per absolute value.
  for (int k = 0; k < m; ++k) {
    const int first_slack = qp.z_dim + 4 * k;
    const int parent_row = 6 * k;
    const SymmetricSparse* hs[4] = {&hess[k].active, nullptr, &hess[k].reactive, nullptr};
    const SparseVector* ls[4] = {&lin[k].active, nullptr, &lin[k].reactive, nullptr};
    for (int r = 0; r < 4; ++r) {
      const int base = r & ~1;
      const double sign = (r & 1) ? -1.0 : 1.0;
      QuadraticConstraint c;
      c.kind = ConstraintKind::CostSlack;
      c.element = k;
      c.hessian = sign > 0 ? *hs[base] : hs[base]->negated();
      c.linear = with_entry(scaled(*ls[base], sign), first_slack + r, -1.0);
      c.constant = 0.0;
      c.limit = 0.0;
      c.parent = parent_row + r;
      c.slack = first_slack + r;
      qp.constraints.push_back(std::move(c));
    }
  }
  return qp;
}

Vector evaluate_constraints(const QclpProblem& problem, std::span<const double> x) {
  if (static_cast<int>(x.size()) != problem.x_dim) throw DimensionError("x length mismatch");
  Vector out(problem.constraints.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = problem.constraints[i].evaluate(x);
  return out;
}

double objective(const QclpProblem& problem, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t j = 0; j < problem.cost.size(); ++j) acc += problem.cost[j] * x[j];
  return acc;
}

Vector with_tight_slacks(const QclpProblem& problem, std::span<const double> z) {
  Vector x(problem.x_dim, 0.0);
  std::copy(z.begin(), z.begin() + problem.z_dim, x.begin());
  for (int i = problem.num_operational(); i < static_cast<int>(problem.num_rows()); ++i) {
    const auto& c = problem.constraints[i];
    // Row value with the slack at zero.
    x[c.slack] = std::max(0.0, c.evaluate(x));
  }
  return x;
}

std::string qclp_diagnostics_json(const QclpProblem& problem) {
  using nlohmann::json;
  std::map<std::string, std::pair<int, std::size_t>> per_kind;
  std::size_t hess_nnz = 0;
  std::size_t lin_nnz = 0;
  int inactive = 0;
  for (const auto& c : problem.constraints) {
    auto& e = per_kind[to_string(c.kind)];
    ++e.first;
    e.second += c.hessian.nnz() + c.linear.nnz();
    hess_nnz += c.hessian.nnz();
    lin_nnz += c.linear.nnz();
    if (!c.active) ++inactive;
  }
  json kinds = json::object();
  for (const auto& [name, e] : per_kind) kinds[name] = {{"count", e.first}, {"nnz", e.second}};
  json doc = {{"buses", problem.num_buses},
              {"lines", problem.num_lines},
              {"rows", problem.constraints.size()},
              {"operational_rows", problem.num_operational()},
              {"inactive_rows", inactive},
              {"x_dim", problem.x_dim},
              {"hessian_nnz", hess_nnz},
              {"linear_nnz", lin_nnz},
              {"kinds", kinds}};
  return doc.dump(2);
}

}  // namespace dcflow
