#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "dcflow/dca.hpp"
#include "dcflow/errors.hpp"
#include "dcflow/perturb.hpp"
#include "dcflow/power_flow.hpp"
#include "test_support.hpp"

namespace dcflow {
namespace {

struct CaseSetup {
  GridModel grid;
  QclpProblem qp;
  std::vector<SplitConstraint> splits;
};

CaseSetup perturbed_case(const char* name, double target) {
  CaseSetup s;
  s.grid = testing::load_case(name);
  const auto y = build_admittance(s.grid);
  PerturbSpec spec;
  spec.seed = 3;
  spec.target_violation = target;
  const OperatingPoint op = perturb(solve_power_flow(s.grid).point, s.grid, spec).point;
  s.qp = assemble_qclp(s.grid, y, op);
  s.splits = split_all(s.qp, y);
  return s;
}

TEST(Dca, SmallPerturbationConverges) {
  const CaseSetup s = perturbed_case("case9", 0.05);
  EXPECT_GT(true_violation(s.qp, s.qp.x0).magnitude, 0.04);
  DcaParams p;
  p.inner_iters = 2000;
  const DcaResult r = dca_solve(s.qp, s.splits, p);
  ASSERT_EQ(r.status, DcaStatus::Converged) << r.outer_iters;
  EXPECT_LE(r.max_violation, p.eps_t);
  EXPECT_EQ(r.outer_iters, static_cast<int>(r.history.size()));
  EXPECT_LE(r.history.back().dx_norm, p.eps_x);
}

TEST(Dca, IterationLimitReturnsBestIterate) {
  const CaseSetup s = perturbed_case("case9", 0.05);
  DcaParams p;
  p.max_outer = 4;
  p.inner_iters = 20;
  const DcaResult r = dca_solve(s.qp, s.splits, p);
  ASSERT_EQ(r.status, DcaStatus::IterLimit);
  ASSERT_EQ(r.history.size(), 4u);
  double best = kUnbounded;
  for (const auto& h : r.history) best = std::min(best, h.t_actual);
  EXPECT_DOUBLE_EQ(r.max_violation, best);
}

TEST(Dca, PenaltyNeverDecreases) {
  const CaseSetup s = perturbed_case("case9", 0.05);
  DcaParams p;
  p.max_outer = 10;
  p.inner_iters = 100;
  const DcaResult r = dca_solve(s.qp, s.splits, p);
  for (std::size_t k = 1; k < r.history.size(); ++k) {
    const double step = r.history[k].beta - r.history[k - 1].beta;
    EXPECT_TRUE(step == 0.0 || step == p.delta2);
  }
}

TEST(Dca, RejectsInvalidParameters) {
  const CaseSetup s = perturbed_case("case9", 0.05);
  DcaParams p;
  p.beta0 = 0.0;
  EXPECT_THROW(dca_solve(s.qp, s.splits, p), SolverError);
  p = {};
  p.max_outer = 0;
  EXPECT_THROW(dca_solve(s.qp, s.splits, p), SolverError);
  EXPECT_THROW(dca_solve(s.qp, std::span(s.splits).first(3), {}), DimensionError);
}

TEST(Dca, KktResidualVanishesWithoutMultipliers) {
  const GridModel g = testing::load_case("case14");
  const QclpProblem qp = assemble_qclp(g, solve_power_flow(g).point);
  const Vector lambda(qp.num_rows(), 0.0);
  const KktResidual k = kkt_residual(qp, qp.x0, lambda);
  EXPECT_EQ(k.stationarity, 0.0);
  EXPECT_EQ(k.complementarity, 0.0);
}

TEST(Dca, ViolationMagnitudeInNaturalUnits) {
  QuadraticConstraint c;
  c.kind = ConstraintKind::VoltUpper;
  c.limit = 1.1;
  // |v|^2 - 1.1^2 for |v| = 1.2
  EXPECT_NEAR(violation_magnitude(c, 1.44 - 1.21), 0.1, 1e-12);
  c.kind = ConstraintKind::VoltLower;
  c.limit = 0.9;
  EXPECT_NEAR(violation_magnitude(c, 0.81 - 0.64), 0.1, 1e-12);
  c.kind = ConstraintKind::PowerUpperP;
  EXPECT_EQ(violation_magnitude(c, 0.3), 0.3);
  EXPECT_EQ(violation_magnitude(c, -0.3), 0.0);
}

TEST(Dca, HistoryCsvHasOneRowPerIteration) {
  std::vector<DcaRecord> h(3);
  std::ostringstream out;
  write_history_csv(out, h);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

}  // namespace
}  // namespace dcflow
