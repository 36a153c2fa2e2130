#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dcflow/dc_split.hpp"
#include "dcflow/errors.hpp"
#include "dcflow/oracle.hpp"
#include "dcflow/power_flow.hpp"
#include "test_support.hpp"

namespace dcflow {
namespace {

double extreme(const std::vector<double>& eigs, bool largest) {
  return largest ? eigs.back() : eigs.front();
}

class SplitCases : public ::testing::TestWithParam<const char*> {};

TEST_P(SplitCases, AnalyticEigenvaluesMatchJacobi) {
  const GridModel g = testing::load_case(GetParam());
  const auto y = build_admittance(g);
  const auto yd = oracle::dense_admittance(g);
  for (int k = 0; k < g.num_buses(); ++k) {
    const PowerEigs e = analytic_power_eigs(y, k);
    const auto [hr, hq] = oracle::dense_power_hessians(yd, k);
    for (const auto& [dense, a] : {std::pair{&hr, e.active}, std::pair{&hq, e.reactive}}) {
      const auto eigs = oracle::dense_symmetric_eigs(*dense);
      const double hi = extreme(eigs, true);
      const double lo = extreme(eigs, false);
      const double scale = std::max(std::abs(hi), std::abs(lo));
      EXPECT_NEAR(a.plus, hi, 1e-9 * scale) << "bus " << k;
      EXPECT_NEAR(a.minus, lo, 1e-9 * scale) << "bus " << k;
      EXPECT_NEAR(a.magnitude, scale, 1e-9 * scale) << "bus " << k;
    }
  }
}

TEST_P(SplitCases, ConcavePartIsPositiveSemidefinite) {
  const GridModel g = testing::load_case(GetParam());
  const auto y = build_admittance(g);
  const QclpProblem qp = assemble_qclp(g, y, solve_power_flow(g).point);
  const auto splits = split_all(qp, y);
  ASSERT_EQ(splits.size(), qp.num_rows());
  for (std::size_t i = 0; i < qp.num_rows(); ++i) {
    const auto& s = splits[i];
    if (s.support.empty()) continue;
    const auto p = oracle::restrict(oracle::to_dense(qp.constraints[i].hessian), s.support);
    oracle::DenseMatrix c(p.rows, p.cols);
    for (int a = 0; a < p.rows; ++a) {
      for (int b = 0; b < p.cols; ++b) c(a, b) = (a == b ? s.alpha : 0.0) - p(a, b);
    }
    EXPECT_GE(oracle::dense_symmetric_eigs(c).front(), -1e-10) << "row " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Cases, SplitCases,
                         ::testing::Values("case9", "case14", "case30", "case57"));

TEST(Split, BoundsOrderedByTightness) {
  const GridModel g = testing::load_case("case30");
  const auto y = build_admittance(g);
  const QclpProblem qp = assemble_qclp(g, y, solve_power_flow(g).point);
  for (int k = 0; k < g.num_buses(); ++k) {
    const auto& c = qp.constraints[6 * k];
    const double exact = constraint_alpha(c, qp, y, {SplitBound::Exact});
    const double row = constraint_alpha(c, qp, y, {SplitBound::RowNorm});
    const double gersh = constraint_alpha(c, qp, y, {SplitBound::Gershgorin});
    EXPECT_LE(exact, row * (1 + 1e-12));
    EXPECT_LE(exact, gersh * (1 + 1e-12));
  }
}

TEST(Split, ThrowsWhenAlphaTooSmall) {
  const GridModel g = testing::load_case("case9");
  const auto y = build_admittance(g);
  const QclpProblem qp = assemble_qclp(g, y, solve_power_flow(g).point);
  const auto& c = qp.constraints[6 * 4];
  const double alpha = constraint_alpha(c, qp, y);
  EXPECT_NO_THROW(split(c, alpha));
  EXPECT_THROW(split(c, 0.5 * alpha), SplitError);
}

TEST(Split, FormsRecombineToHessian) {
  const GridModel g = testing::load_case("case14");
  const auto y = build_admittance(g);
  const QclpProblem qp = assemble_qclp(g, y, solve_power_flow(g).point);
  const auto splits = split_all(qp, y);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector z(qp.z_dim);
  for (auto& v : z) v = dist(rng);
  for (std::size_t i = 0; i < qp.num_rows(); ++i) {
    const auto& c = qp.constraints[i];
    const double direct = c.hessian.quadratic_form(z);
    const double dc = splits[i].convex_form(z) - splits[i].concave_form(c, z);
    EXPECT_NEAR(direct, dc, 1e-9 * std::max(1.0, splits[i].convex_form(z))) << "row " << i;
  }
}

TEST(Split, CostRowsShareParentAlpha) {
  const GridModel g = testing::load_case("case9");
  const auto y = build_admittance(g);
  const QclpProblem qp = assemble_qclp(g, y, solve_power_flow(g).point);
  const auto splits = split_all(qp, y);
  for (std::size_t i = qp.num_operational(); i < qp.num_rows(); ++i) {
    EXPECT_EQ(splits[i].alpha, splits[qp.constraints[i].parent].alpha);
  }
}

}  // namespace
}  // namespace dcflow
