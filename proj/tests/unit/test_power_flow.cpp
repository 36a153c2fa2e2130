#include <gtest/gtest.h>

#include <cmath>

#include "dcflow/oracle.hpp"
#include "dcflow/power_flow.hpp"
#include "test_support.hpp"

namespace dcflow {
namespace {

class PowerFlowCases : public ::testing::TestWithParam<const char*> {};

TEST_P(PowerFlowCases, ConvergesAndHonoursSchedule) {
  const GridModel g = testing::load_case(GetParam());
  const PowerFlowResult pf = solve_power_flow(g);
  ASSERT_TRUE(pf.converged);
  EXPECT_LE(pf.mismatch, 1e-10);
  // Kirchhoff: s is what the dense product gives for v.
  const auto s = oracle::dense_power_injections(oracle::dense_admittance(g), pf.point.v);
  for (int k = 0; k < g.num_buses(); ++k) {
    const Bus& b = g.buses[k];
    EXPECT_LT(std::abs(s[k] - pf.point.s[k]), 1e-9);
    if (b.kind == BusKind::Slack) {
      EXPECT_NEAR(std::abs(pf.point.v[k]), b.v_set, 1e-12);
      EXPECT_NEAR(std::arg(pf.point.v[k]), 0.0, 1e-12);
    } else if (b.kind == BusKind::PV) {
      EXPECT_NEAR(std::abs(pf.point.v[k]), b.v_set, 1e-10);
      EXPECT_NEAR(s[k].real(), b.p_set, 1e-9);
    } else {
      EXPECT_NEAR(s[k].real(), b.p_set, 1e-9);
      EXPECT_NEAR(s[k].imag(), b.q_set, 1e-9);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Cases, PowerFlowCases,
                         ::testing::Values("case9", "case14", "case30", "case57", "case118"));

}  // namespace
}  // namespace dcflow
