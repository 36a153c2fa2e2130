#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dcflow/dca.hpp"
#include "dcflow/grid.hpp"

namespace dcflow {

enum class PolicyType { Rule, DcOpf };

struct SimPolicy {
  PolicyType type = PolicyType::DcOpf;
  double fraction = 0.5;     ///< Rule: in-feed cap as a fraction of rated power
  int inner_iters = 200;     ///< DcOpf: per-subproblem cap
  int max_outer = 400;
  bool warm_start = true;
  double margin = 0.002;     ///< DcOpf: v_max is tightened by this much
};

/// Time series over a grid. Profiles hold the available renewable in-feed
/// per bus (p.u., positive); loads hold active withdrawal (p.u.). Reactive
/// load is `load * tan_phi`.
struct SimScenario {
  GridModel grid;
  int horizon = 0;
  double dt_minutes = 15.0;
  std::map<int, Vector> profiles;  ///< bus id -> available in-feed
  std::map<int, Vector> loads;     ///< bus id -> withdrawal
  std::map<int, double> rated;     ///< bus id -> rated in-feed; default: profile peak
  double tan_phi = 0.2;
  SimPolicy policy;

  void validate() const;
};

SimScenario scenario_from_json(std::string_view text);
std::string scenario_to_json(const SimScenario& scenario);
SimScenario load_scenario(const std::string& path);

/// Bundled 18-bus feeder with a day profile (96 quarter hours, midday peak).
SimScenario feeder18_scenario(PolicyType policy = PolicyType::DcOpf);

struct SimStep {
  int step = 0;
  bool violated = false;  ///< uncontrolled state broke a limit
  bool fallback = false;  ///< optimizer failed, rule applied instead
  double available = 0.0;
  double integrated = 0.0;
  double curtailed = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;
  int outer_iters = 0;
  int inner_iters = 0;
  double solve_seconds = 0.0;
  Vector v_mag;
};

struct SimReport {
  std::vector<SimStep> steps;
  double energy_available = 0.0;  ///< p.u. h
  double energy_integrated = 0.0;
  double energy_curtailed = 0.0;
  int interventions = 0;
  int fallbacks = 0;
  double v_lowest = 0.0;
  double v_highest = 0.0;
  /// Inner iterations per optimizer solve, in order.
  std::vector<int> solve_inner_iters;

  double mean_inner_iters() const;
};

SimReport run_simulation(const SimScenario& scenario);

std::string report_to_json(const SimReport& report, const SimScenario& scenario);
/// step,bus_id,v_mag rows followed by nothing else; one row per bus per step.
void write_voltage_csv(std::ostream& out, const SimReport& report, const GridModel& grid);

}  // namespace dcflow
