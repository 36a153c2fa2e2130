#include <gtest/gtest.h>

#include <cmath>

#include "dcflow/errors.hpp"
#include "dcflow/feeder.hpp"
#include "dcflow/grid.hpp"
#include "dcflow/oracle.hpp"
#include "test_support.hpp"

namespace dcflow {
namespace {

constexpr const char* kTwoBus = R"(function mpc = two
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0 0 0 0 1 1 0 230 1 1.1 0.9;
  2 1 50 10 0 0 1 1 0 230 1 1.05 0.95;
];
mpc.gen = [
  1 0 0 100 -100 1 100 1 200 0;
];
mpc.branch = [
  1 2 0.01 0.1 0 150 0 0 0 0 1 -360 360;
];
)";

TEST(Matpower, ParsesTwoBusCase) {
  const GridModel g = parse_matpower(kTwoBus);
  ASSERT_EQ(g.num_buses(), 2);
  ASSERT_EQ(g.num_branches(), 1);
  EXPECT_EQ(g.slack_index(), 0);
  EXPECT_DOUBLE_EQ(g.buses[1].v_max, 1.05);
  EXPECT_DOUBLE_EQ(g.buses[1].v_min, 0.95);
  // A pure load bus has a fixed withdrawal.
  EXPECT_DOUBLE_EQ(g.buses[1].p_min, 0.5);
  EXPECT_DOUBLE_EQ(g.buses[1].p_max, 0.5);
  EXPECT_DOUBLE_EQ(g.buses[1].q_min, 0.1);
  EXPECT_DOUBLE_EQ(g.branches[0].i_max, 1.5);
  EXPECT_EQ(g.branches[0].impedance, Complex(0.01, 0.1));
}

TEST(Matpower, GeneratorBoundsBecomeWithdrawalBounds) {
  const GridModel g = testing::load_case("case9");
  const int k = g.index_of(2);
  ASSERT_GE(k, 0);
  // Bus 2 has no load and a 10..300 MW generator.
  EXPECT_DOUBLE_EQ(g.buses[k].p_min, -3.0);
  EXPECT_DOUBLE_EQ(g.buses[k].p_max, -0.1);
}

TEST(Matpower, RejectsMissingBlock) {
  EXPECT_THROW(parse_matpower("mpc.baseMVA = 100;\n"), ParseError);
}

TEST(Matpower, RejectsBadNumberWithLine) {
  std::string text = kTwoBus;
  text.replace(text.find("0.01 0.1"), 4, "0.0x");
  try {
    parse_matpower(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.line(), 0);
  }
}

TEST(Matpower, LoadsBundledCases) {
  for (const auto& [name, buses, branches] :
       {std::tuple{"case9", 9, 9}, std::tuple{"case14", 14, 20}, std::tuple{"case30", 30, 41},
        std::tuple{"case57", 57, 80}, std::tuple{"case118", 118, 186}}) {
    const GridModel g = testing::load_case(name);
    EXPECT_EQ(g.num_buses(), buses) << name;
    EXPECT_EQ(g.num_branches(), branches) << name;
    EXPECT_TRUE(g.is_connected()) << name;
  }
}

TEST(GridJson, RoundTripIsExact) {
  const GridModel g = testing::load_case("case30");
  EXPECT_EQ(grid_from_json(grid_to_json(g)), g);
}

TEST(Grid, ValidateRejectsTwoSlacks) {
  GridModel g = parse_matpower(kTwoBus);
  g.buses[1].is_slack = true;
  EXPECT_THROW(g.validate(), ModelError);
}

TEST(Grid, ValidateRejectsInvertedBand) {
  GridModel g = parse_matpower(kTwoBus);
  g.buses[1].v_min = 1.2;
  EXPECT_THROW(g.validate(), ModelError);
}

TEST(Admittance, MatchesDenseAssembly) {
  for (const char* name : {"case9", "case30", "case118"}) {
    const GridModel g = testing::load_case(name);
    const auto y = build_admittance(g);
    const auto dense = oracle::dense_admittance(g);
    for (int r = 0; r < g.num_buses(); ++r) {
      for (int c = 0; c < g.num_buses(); ++c) {
        EXPECT_LT(std::abs(y.coeff(r, c) - dense[r][c]), 1e-12) << name << " " << r << "," << c;
      }
    }
  }
}

TEST(Admittance, RowsSumToShunt) {
  const GridModel g = testing::load_case("case14");
  const auto y = build_admittance(g);
  for (int r = 0; r < g.num_buses(); ++r) {
    Complex sum{};
    for (const Complex v : y.row_values(r)) sum += v;
    EXPECT_LT(std::abs(sum - g.buses[r].shunt), 1e-12);
  }
}

TEST(PowerInjections, MatchesDense) {
  const GridModel g = testing::load_case("case30");
  const auto y = build_admittance(g);
  ComplexVector v(g.num_buses());
  for (int k = 0; k < g.num_buses(); ++k) v[k] = std::polar(1.0 + 0.001 * k, -0.01 * k);
  const auto s = power_injections(y, v);
  const auto ref = oracle::dense_power_injections(oracle::dense_admittance(g), v);
  for (int k = 0; k < g.num_buses(); ++k) EXPECT_LT(std::abs(s[k] - ref[k]), 1e-12);
}

TEST(Feeder, IsRadialAndConnected) {
  FeederSpec spec;
  spec.num_buses = 200;
  const GridModel g = radial_feeder(spec);
  EXPECT_EQ(g.num_buses(), 200);
  EXPECT_EQ(g.num_branches(), 199);
  EXPECT_TRUE(g.is_connected());
  EXPECT_EQ(g.slack_index(), 0);
}

TEST(Feeder, RejectsSingleBus) {
  FeederSpec spec;
  spec.num_buses = 1;
  EXPECT_THROW(radial_feeder(spec), ModelError);
}

}  // namespace
}  // namespace dcflow
