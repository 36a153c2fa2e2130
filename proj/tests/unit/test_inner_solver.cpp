#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dcflow/dc_split.hpp"
#include "dcflow/errors.hpp"
#include "dcflow/inner_solver.hpp"
#include "dcflow/oracle.hpp"
#include "dcflow/perturb.hpp"
#include "dcflow/power_flow.hpp"
#include "test_support.hpp"

namespace dcflow {
namespace {

// One row  c z + w y - d <= t  over a single variable.
LiftedProblem scalar_problem(double c, double w, double d) {
  LiftedProblem lp;
  lp.num_rows = 1;
  lp.z_dim = 1;
  lp.x_dim = 1;
  lp.num_operational = 1;
  lp.row_ptr = {0, 1};
  lp.col = {0};
  lp.c_val = {c};
  lp.d_weight = {w};
  lp.d = {d};
  lp.slack = {-1};
  return lp;
}

LiftedProblem case_problem(const char* name, double magnitude, double beta) {
  const GridModel g = testing::load_case(name);
  const auto y = build_admittance(g);
  PerturbSpec spec;
  spec.magnitude = magnitude;
  const OperatingPoint op = perturb(solve_power_flow(g).point, g, spec).point;
  const QclpProblem qp = assemble_qclp(g, y, op);
  const auto splits = split_all(qp, y);
  return linearize(qp, splits, with_tight_slacks(qp, Vector(qp.z_dim, 0.0)), beta);
}

TEST(Inner, ScalarProblemHasClosedForm) {
  // min_z (c z + w z^2 - d)+ = (-c^2 / (4w) - d)+ attained at z = -c / (2w).
  for (const auto& [c, w, d] : {std::tuple{2.0, 1.0, -3.0}, std::tuple{2.0, 1.0, 0.5},
                                std::tuple{-1.0, 4.0, -1.0}}) {
    const LiftedProblem lp = scalar_problem(c, w, d);
    InnerOptions opts;
    opts.max_iters = 2000;
    opts.tol = 1e-12;
    const InnerSolution sol = solve_inner(lp, {}, opts);
    const double optimum = std::max(0.0, -c * c / (4 * w) - d);
    EXPECT_NEAR(sol.dual_value, optimum, 1e-6);
    EXPECT_NEAR(sol.primal_value, optimum, 1e-6);
    if (optimum > 0.0) EXPECT_NEAR(sol.x[0], -c / (2 * w), 1e-6);
  }
}

TEST(Inner, GradientMatchesFiniteDifferences) {
  const LiftedProblem lp = case_problem("case9", 0.02, 2.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Vector lambda(lp.num_rows), grad(lp.num_rows);
  const auto f = [&](std::span<const double> l) { return dual_value_grad(l, lp, {}); };
  for (int trial = 0; trial < 5; ++trial) {
    for (auto& v : lambda) v = dist(rng);
    dual_value_grad(lambda, lp, grad);
    const auto fd = oracle::finite_diff_gradient(f, lambda);
    double scale = 0.0;
    for (const double g : grad) scale = std::max(scale, std::abs(g));
    for (int i = 0; i < lp.num_rows; ++i) EXPECT_NEAR(grad[i], fd[i], 1e-6 * scale);
  }
}

TEST(Inner, WeakDualityAndBox) {
  const LiftedProblem lp = case_problem("case30", 0.01, 1.0);
  InnerOptions opts;
  opts.max_iters = 300;
  const InnerSolution sol = solve_inner(lp, {}, opts);
  EXPECT_LE(sol.dual_value, sol.primal_value + 1e-9);
  for (const double l : sol.lambda) {
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, 1.0);
  }
  EXPECT_EQ(sol.iterations, 300);
}

TEST(Inner, AcceptedDualValuesNeverIncrease) {
  const LiftedProblem lp = case_problem("case9", 0.02, 1.0);
  std::stringstream trace;
  InnerOptions opts;
  opts.max_iters = 400;
  opts.trace = &trace;
  solve_inner(lp, {}, opts);
  std::string line;
  std::getline(trace, line);
  EXPECT_EQ(line, "iter,dual_value,step,ls_trials,pg_norm");
  double prev = -1e300;
  int rows = 0;
  while (std::getline(trace, line)) {
    const double dual = std::stod(line.substr(line.find(',') + 1));
    EXPECT_GE(dual, prev - 1e-12);
    prev = dual;
    ++rows;
  }
  EXPECT_EQ(rows, 400);
}

TEST(Inner, PrimalRecoveryIsTight) {
  const LiftedProblem lp = case_problem("case9", 0.02, 1.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Vector lambda(lp.num_rows);
  for (auto& v : lambda) v = dist(rng);
  const PrimalPoint p = recover_primal(lambda, lp);
  for (int j = 0; j < lp.z_dim; ++j) EXPECT_EQ(p.x[j] * p.x[j] - p.y[j], 0.0);
  for (int i = 0; i < lp.num_rows; ++i) {
    EXPECT_GE(p.t[i], 0.0);
    if (lp.slack[i] >= 0) EXPECT_EQ(p.x[lp.slack[i]], p.t[i]);
  }
}

TEST(Inner, ClampsInitialMultipliers) {
  const LiftedProblem lp = scalar_problem(2.0, 1.0, -3.0);
  InnerOptions opts;
  opts.max_iters = 1;
  const InnerSolution sol = solve_inner(lp, Vector{5.0}, opts);
  EXPECT_LE(sol.lambda[0], 1.0);
}

TEST(Inner, RejectsBadInput) {
  const LiftedProblem lp = scalar_problem(2.0, 1.0, -3.0);
  InnerOptions opts;
  opts.max_iters = 0;
  EXPECT_THROW(solve_inner(lp, {}, opts), SolverError);
  EXPECT_THROW(solve_inner(lp, Vector{0.5, 0.5}, {}), DimensionError);
}

TEST(Inner, NonFiniteObjectiveIsSolverError) {
  LiftedProblem lp = scalar_problem(2.0, 1.0, -3.0);
  lp.d[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve_inner(lp, {}, {}), SolverError);
}

TEST(Inner, ReplacingYBySquaresNeverIncreasesObjective) {
  const LiftedProblem lp = case_problem("case9", 0.02, 1.0);
  const InnerSolution sol = solve_inner(lp, {}, {});
  const std::span<const double> z(sol.x.data(), lp.z_dim);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> dist(0.0, 0.1);
  Vector loose(lp.z_dim);
  for (int trial = 0; trial < 20; ++trial) {
    for (int j = 0; j < lp.z_dim; ++j) loose[j] = sol.y[j] + dist(rng);
    EXPECT_LE(lifted_objective(lp, z, sol.y), lifted_objective(lp, z, loose) + 1e-12);
  }
}

}  // namespace
}  // namespace dcflow
