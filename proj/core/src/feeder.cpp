#include "dcflow/feeder.hpp"

#include <cmath>
#include <random>

#include "dcflow/errors.hpp"

namespace dcflow {

GridModel radial_feeder(const FeederSpec& spec) {
  if (spec.num_buses < 2) throw ModelError("a feeder needs at least two buses");
  if (!(spec.r >= 0.0 && spec.x >= 0.0 && spec.r + spec.x > 0.0)) {
    throw ModelError("segment impedance must be nonzero");
  }
  const int n = spec.num_buses;
  int trunk = spec.trunk_length > 0
                  ? spec.trunk_length
                  : std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))));
  trunk = std::min(trunk, n - 1);

  GridModel g;
  g.base_mva = 10.0;
  g.buses.resize(n);
  for (int k = 0; k < n; ++k) {
    auto& b = g.buses[k];
    b.id = k + 1;
    b.v_min = spec.v_min;
    b.v_max = spec.v_max;
    b.p_min = b.p_max = 0.0;
    b.q_min = b.q_max = 0.0;
  }
  auto& slack = g.buses[0];
  slack.kind = BusKind::Slack;
  slack.is_slack = true;
  slack.v_min = slack.v_max = slack.v_set = spec.slack_voltage;
  slack.p_min = slack.q_min = -kUnbounded;
  slack.p_max = slack.q_max = kUnbounded;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  auto segment = [&](int from, int to) {
    const double f = spec.seed != 0 ? jitter(rng) : 1.0;
    g.branches.push_back({from, to, Complex(spec.r * f, spec.x * f), spec.i_max});
  };

  for (int k = 1; k <= trunk; ++k) segment(k - 1, k);
  // Remaining buses form laterals of roughly trunk length, spread along the trunk.
  int next = trunk + 1;
  int lateral = 0;
  while (next < n) {
    const int root = 1 + (lateral * 7) % trunk;
    const int len = std::min(n - next, std::max(1, trunk / 2 + lateral % 3));
    int prev = root;
    for (int i = 0; i < len; ++i) {
      segment(prev, next);
      prev = next++;
    }
    ++lateral;
  }
  g.validate();
  return g;
}

}  // namespace dcflow
