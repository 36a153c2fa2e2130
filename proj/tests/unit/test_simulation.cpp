#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "dcflow/errors.hpp"
#include "dcflow/simulation.hpp"
#include "test_support.hpp"

namespace dcflow {
namespace {

SimScenario short_rule_scenario(int horizon) {
  SimScenario s = feeder18_scenario(PolicyType::Rule);
  // Keep the midday part, where the feeder sees its peak.
  const int start = 44;
  for (auto* series : {&s.profiles, &s.loads}) {
    for (auto& [id, v] : *series) v = Vector(v.begin() + start, v.begin() + start + horizon);
  }
  s.horizon = horizon;
  return s;
}

TEST(Simulation, EnergyIsConserved) {
  const SimScenario s = short_rule_scenario(8);
  const SimReport r = run_simulation(s);
  ASSERT_EQ(r.steps.size(), 8u);
  double avail = 0.0;
  for (const auto& st : r.steps) {
    EXPECT_NEAR(st.available, st.integrated + st.curtailed, 1e-9);
    avail += st.available;
  }
  EXPECT_NEAR(r.energy_available, avail * s.dt_minutes / 60.0, 1e-9);
  EXPECT_NEAR(r.energy_available, r.energy_integrated + r.energy_curtailed, 1e-9);
}

TEST(Simulation, RuleCapsInFeed) {
  const SimScenario s = short_rule_scenario(8);
  double rated = 0.0;
  for (const auto& [id, r] : s.rated) rated += r;
  const SimReport r = run_simulation(s);
  for (const auto& st : r.steps) EXPECT_LE(st.integrated, s.policy.fraction * rated + 1e-12);
}

TEST(Simulation, NoInterventionWithoutInFeed) {
  SimScenario s = short_rule_scenario(4);
  s.policy.type = PolicyType::DcOpf;
  for (auto& [id, v] : s.profiles) std::fill(v.begin(), v.end(), 0.0);
  const SimReport r = run_simulation(s);
  EXPECT_EQ(r.interventions, 0);
  EXPECT_EQ(r.fallbacks, 0);
  EXPECT_TRUE(r.solve_inner_iters.empty());
  EXPECT_EQ(r.energy_curtailed, 0.0);
}

TEST(Simulation, OptimizerKeepsVoltagesInBand) {
  SimScenario s = short_rule_scenario(3);
  s.policy.type = PolicyType::DcOpf;
  const SimReport r = run_simulation(s);
  EXPECT_GT(r.interventions, 0);
  EXPECT_EQ(r.fallbacks, 0);
  EXPECT_LE(r.v_highest, 1.07);
  EXPECT_GE(r.v_lowest, 0.9);
}

TEST(Simulation, ScenarioJsonRoundTrip) {
  const SimScenario s = feeder18_scenario();
  const std::string text = scenario_to_json(s);
  EXPECT_EQ(scenario_to_json(scenario_from_json(text)), text);
}

TEST(Simulation, BundledScenarioMatchesGenerator) {
  const SimScenario s = load_scenario(testing::data_path("scenarios/feeder18.json"));
  EXPECT_EQ(scenario_to_json(s), scenario_to_json(feeder18_scenario()));
}

TEST(Simulation, ValidationErrors) {
  SimScenario s = feeder18_scenario();
  s.horizon = 0;
  EXPECT_THROW(s.validate(), ModelError);
  s = feeder18_scenario();
  s.profiles[999] = Vector(s.horizon, 0.0);
  EXPECT_THROW(s.validate(), ModelError);
  s = feeder18_scenario();
  s.profiles.begin()->second.pop_back();
  EXPECT_THROW(s.validate(), ModelError);
  s = feeder18_scenario(PolicyType::Rule);
  s.policy.fraction = 0.0;
  EXPECT_THROW(s.validate(), ModelError);
  EXPECT_THROW(scenario_from_json("{"), ParseError);
  EXPECT_THROW(load_scenario(testing::data_path("scenarios/missing.json")), ParseError);
}

TEST(Simulation, VoltageCsvHasRowPerBusAndStep) {
  const SimScenario s = short_rule_scenario(2);
  const SimReport r = run_simulation(s);
  std::ostringstream out;
  write_voltage_csv(out, r, s.grid);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * s.grid.num_buses());
}

}  // namespace
}  // namespace dcflow
