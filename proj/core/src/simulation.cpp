#include "dcflow/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dcflow/dc_split.hpp"
#include "dcflow/errors.hpp"
#include "dcflow/feeder.hpp"
#include "dcflow/power_flow.hpp"
#include "dcflow/qclp.hpp"
#include "json.hpp"

namespace dcflow {

using nlohmann::json;

void SimScenario::validate() const {
  if (horizon < 1) throw ModelError("horizon must be >= 1");
  if (!(dt_minutes > 0.0)) throw ModelError("dt_minutes must be positive");
  auto check = [&](const std::map<int, Vector>& series, const char* what) {
    for (const auto& [id, values] : series) {
      if (grid.index_of(id) < 0) {
        throw ModelError(std::string(what) + " references unknown bus " + std::to_string(id));
      }
      if (static_cast<int>(values.size()) != horizon) {
        throw ModelError(std::string(what) + " for bus " + std::to_string(id) +
                         " does not match the horizon");
      }
      for (const double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw ModelError(std::string(what) + " values must be finite and >= 0");
        }
      }
    }
  };
  check(profiles, "profile");
  check(loads, "load");
  for (const auto& [id, r] : rated) {
    if (!profiles.count(id)) throw ModelError("rated power given for bus without profile");
    if (!(r > 0.0)) throw ModelError("rated power must be positive");
  }
  if (policy.type == PolicyType::Rule && !(policy.fraction > 0.0 && policy.fraction <= 1.0)) {
    throw ModelError("rule fraction must be in (0, 1]");
  }
  if (policy.inner_iters < 1 || policy.max_outer < 1) {
    throw ModelError("iteration caps must be >= 1");
  }
}

namespace {

std::map<int, Vector> series_from_json(const json& obj) {
  std::map<int, Vector> out;
  for (const auto& [key, values] : obj.items()) out[std::stoi(key)] = values.get<Vector>();
  return out;
}

json series_to_json(const std::map<int, Vector>& series) {
  json obj = json::object();
  for (const auto& [id, values] : series) obj[std::to_string(id)] = values;
  return obj;
}

}  // namespace

SimScenario scenario_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), 0);
  }
  SimScenario sc;
  try {
    sc.grid = grid_from_json(doc.at("grid").dump());
    sc.horizon = doc.at("horizon").get<int>();
    sc.dt_minutes = doc.value("dt_minutes", 15.0);
    sc.tan_phi = doc.value("tan_phi", 0.2);
    sc.profiles = series_from_json(doc.at("profiles"));
    if (doc.contains("loads")) sc.loads = series_from_json(doc.at("loads"));
    if (doc.contains("rated")) {
      for (const auto& [key, v] : doc.at("rated").items()) sc.rated[std::stoi(key)] = v.get<double>();
    }
    if (doc.contains("policy")) {
      const auto& p = doc.at("policy");
      const std::string type = p.value("type", "dcopf");
      if (type == "rule") {
        sc.policy.type = PolicyType::Rule;
      } else if (type == "dcopf") {
        sc.policy.type = PolicyType::DcOpf;
      } else {
        throw ParseError("unknown policy type '" + type + "'", 0);
      }
      sc.policy.fraction = p.value("fraction", sc.policy.fraction);
      sc.policy.inner_iters = p.value("inner_iters", sc.policy.inner_iters);
      sc.policy.max_outer = p.value("max_outer", sc.policy.max_outer);
      sc.policy.warm_start = p.value("warm_start", sc.policy.warm_start);
      sc.policy.margin = p.value("margin", sc.policy.margin);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what(), 0);
  } catch (const std::invalid_argument&) {
    throw ParseError("scenario JSON: bus ids must be integers", 0);
  }
  sc.validate();
  return sc;
}

std::string scenario_to_json(const SimScenario& sc) {
  json rated = json::object();
  for (const auto& [id, r] : sc.rated) rated[std::to_string(id)] = r;
  json doc = {{"grid", json::parse(grid_to_json(sc.grid))},
              {"horizon", sc.horizon},
              {"dt_minutes", sc.dt_minutes},
              {"tan_phi", sc.tan_phi},
              {"profiles", series_to_json(sc.profiles)},
              {"loads", series_to_json(sc.loads)},
              {"rated", rated},
              {"policy",
               {{"type", sc.policy.type == PolicyType::Rule ? "rule" : "dcopf"},
                {"fraction", sc.policy.fraction},
                {"inner_iters", sc.policy.inner_iters},
                {"max_outer", sc.policy.max_outer},
                {"warm_start", sc.policy.warm_start},
                {"margin", sc.policy.margin}}}};
  return doc.dump(1);
}

SimScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

SimScenario feeder18_scenario(PolicyType policy) {
  FeederSpec spec;
  spec.num_buses = 18;
  spec.trunk_length = 8;
  SimScenario sc;
  sc.grid = radial_feeder(spec);
  sc.horizon = 96;
  sc.dt_minutes = 15.0;
  sc.policy.type = policy;

  const double pi = std::numbers::pi;
  for (int k = 1; k < sc.grid.num_buses(); ++k) {
    const int id = sc.grid.buses[k].id;
    Vector load(sc.horizon), res(sc.horizon);
    const bool has_res = k % 3 != 0;
    const double rated = has_res ? 0.08 + 0.015 * (k % 4) : 0.0;
    for (int t = 0; t < sc.horizon; ++t) {
      const double hour = (t + 0.5) * sc.dt_minutes / 60.0;
      // Residential shape: night trough, evening peak.
      const double shape = 0.55 + 0.25 * std::sin(pi * (hour - 6.0) / 12.0) +
                           0.2 * std::exp(-0.5 * std::pow((hour - 19.0) / 1.5, 2.0));
      load[t] = 0.03 * shape;
      const double sun = std::sin(pi * (hour - 6.0) / 13.0);
      res[t] = sun > 0.0 ? rated * std::pow(sun, 1.5) : 0.0;
    }
    sc.loads[id] = load;
    if (has_res) {
      sc.profiles[id] = res;
      sc.rated[id] = rated;
    }
  }
  sc.validate();
  return sc;
}

double SimReport::mean_inner_iters() const {
  if (solve_inner_iters.empty()) return 0.0;
  double acc = 0.0;
  for (const int n : solve_inner_iters) acc += n;
  return acc / static_cast<double>(solve_inner_iters.size());
}

namespace {

double limit_excess(const GridModel& grid, std::span<const Complex> v) {
  double worst = 0.0;
  for (int k = 0; k < grid.num_buses(); ++k) {
    const double m = std::abs(v[k]);
    worst = std::max({worst, m - grid.buses[k].v_max, grid.buses[k].v_min - m});
  }
  for (const auto& br : grid.branches) {
    const double i = std::abs(br.admittance()) * std::abs(v[br.from] - v[br.to]);
    worst = std::max(worst, i - br.i_max);
  }
  return worst;
}

class Simulator {
 public:
  explicit Simulator(const SimScenario& sc) : sc_(sc), y_(build_admittance(sc.grid)) {
    for (const auto& [id, values] : sc.profiles) {
      const int k = sc.grid.index_of(id);
      res_index_.push_back(k);
      const auto it = sc.rated.find(id);
      rated_.push_back(it != sc.rated.end() ? it->second
                                            : *std::max_element(values.begin(), values.end()));
    }
  }

  SimReport run() {
    SimReport rep;
    rep.v_lowest = kUnbounded;
    rep.v_highest = 0.0;
    const double hours = sc_.dt_minutes / 60.0;
    for (int t = 0; t < sc_.horizon; ++t) {
      SimStep st = step(t, rep);
      rep.energy_available += st.available * hours;
      rep.energy_integrated += st.integrated * hours;
      rep.energy_curtailed += st.curtailed * hours;
      if (st.violated) ++rep.interventions;
      if (st.fallback) ++rep.fallbacks;
      rep.v_lowest = std::min(rep.v_lowest, st.v_min);
      rep.v_highest = std::max(rep.v_highest, st.v_max);
      rep.steps.push_back(std::move(st));
    }
    return rep;
  }

 private:
  double load_at(int k, int t) const {
    const auto it = sc_.loads.find(sc_.grid.buses[k].id);
    return it == sc_.loads.end() ? 0.0 : it->second[t];
  }

  double avail_at(std::size_t r, int t) const {
    return sc_.profiles.at(sc_.grid.buses[res_index_[r]].id)[t];
  }

  // Power flow with the given in-feed per renewable bus.
  OperatingPoint flow(int t, const Vector& infeed) {
    const int m = sc_.grid.num_buses();
    ComplexVector schedule(m);
    for (int k = 0; k < m; ++k) {
      const double l = load_at(k, t);
      schedule[k] = Complex(l, l * sc_.tan_phi);
    }
    for (std::size_t r = 0; r < res_index_.size(); ++r) schedule[res_index_[r]] -= infeed[r];
    const auto pf = solve_power_flow(sc_.grid, y_, schedule, {}, last_v_);
    if (!pf.converged) throw SolverError("power flow failed at step " + std::to_string(t));
    last_v_ = pf.point.v;
    return pf.point;
  }

  Vector rule_infeed(int t) const {
    Vector out(res_index_.size());
    for (std::size_t r = 0; r < out.size(); ++r) {
      out[r] = std::min(avail_at(r, t), sc_.policy.fraction * rated_[r]);
    }
    return out;
  }

  // Returns the in-feed chosen by the optimizer, or nothing on failure.
  bool optimize(int t, const OperatingPoint& op0, Vector& infeed, SimStep& st, SimReport& rep) {
    GridModel g = sc_.grid;
    const int m = g.num_buses();
    for (int k = 0; k < m; ++k) {
      auto& b = g.buses[k];
      if (b.is_slack) continue;
      b.p_min = b.p_max = op0.s[k].real();
      b.q_min = b.q_max = op0.s[k].imag();
      b.v_max -= sc_.policy.margin;
    }
    for (std::size_t r = 0; r < res_index_.size(); ++r) {
      auto& b = g.buses[res_index_[r]];
      b.p_max = load_at(res_index_[r], t);
      b.p_min = std::min(b.p_min, b.p_max);
    }

    const auto start = std::chrono::steady_clock::now();
    const QclpProblem qp = assemble_qclp(g, y_, op0, 1e-6);
    const auto splits = split_all(qp, y_);
    DcaParams params;
    params.inner_iters = sc_.policy.inner_iters;
    params.max_outer = sc_.policy.max_outer;
    DcaStart warm;
    if (sc_.policy.warm_start && !prev_v_.empty()) {
      Vector z(qp.z_dim);
      for (int k = 0; k < m; ++k) {
        z[k] = (prev_v_[k] - op0.v[k]).real();
        z[m + k] = (prev_v_[k] - op0.v[k]).imag();
      }
      warm.x = with_tight_slacks(qp, z);
      warm.lambda = prev_lambda_;
      warm.beta = prev_beta_;
    }
    DcaResult res;
    try {
      res = dca_solve(qp, splits, params, warm);
    } catch (const Error&) {
      res.status = DcaStatus::InnerFailure;
    }
    st.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    st.outer_iters = res.outer_iters;
    st.inner_iters = res.total_inner_iters();
    rep.solve_inner_iters.push_back(st.inner_iters);
    if (res.status == DcaStatus::InnerFailure || res.x.empty() || res.max_violation > 1e-3) {
      return false;
    }

    ComplexVector v(m);
    for (int k = 0; k < m; ++k) v[k] = op0.v[k] + Complex(res.x[k], res.x[m + k]);
    const ComplexVector s = power_injections(y_, v);
    infeed.assign(res_index_.size(), 0.0);
    for (std::size_t r = 0; r < res_index_.size(); ++r) {
      const int k = res_index_[r];
      const double avail = avail_at(r, t);
      const double curtail = std::clamp(s[k].real() - op0.s[k].real(), 0.0, avail);
      infeed[r] = avail - curtail;
    }
    prev_v_ = std::move(v);
    prev_lambda_ = std::move(res.lambda);
    prev_beta_ = res.beta;
    return true;
  }

  SimStep step(int t, SimReport& rep) {
    SimStep st;
    st.step = t;
    Vector infeed(res_index_.size());
    for (std::size_t r = 0; r < infeed.size(); ++r) {
      infeed[r] = avail_at(r, t);
      st.available += infeed[r];
    }
    OperatingPoint op = flow(t, infeed);
    if (limit_excess(sc_.grid, op.v) > 0.0) {
      st.violated = true;
      if (sc_.policy.type == PolicyType::Rule) {
        infeed = rule_infeed(t);
      } else if (!optimize(t, op, infeed, st, rep)) {
        st.fallback = true;
        infeed = rule_infeed(t);
      }
      op = flow(t, infeed);
    }
    for (const double f : infeed) st.integrated += f;
    st.curtailed = st.available - st.integrated;
    st.v_mag.resize(op.v.size());
    st.v_min = kUnbounded;
    for (std::size_t k = 0; k < op.v.size(); ++k) {
      st.v_mag[k] = std::abs(op.v[k]);
      st.v_min = std::min(st.v_min, st.v_mag[k]);
      st.v_max = std::max(st.v_max, st.v_mag[k]);
    }
    return st;
  }

  const SimScenario& sc_;
  SparseComplexMatrix y_;
  std::vector<int> res_index_;
  Vector rated_;
  ComplexVector last_v_;
  ComplexVector prev_v_;
  Vector prev_lambda_;
  double prev_beta_ = 0.0;
};

}  // namespace

SimReport run_simulation(const SimScenario& scenario) {
  scenario.validate();
  return Simulator(scenario).run();
}

std::string report_to_json(const SimReport& rep, const SimScenario& sc) {
  json steps = json::array();
  for (const auto& st : rep.steps) {
    steps.push_back({{"step", st.step},
                     {"violated", st.violated},
                     {"fallback", st.fallback},
                     {"available", st.available},
                     {"integrated", st.integrated},
                     {"curtailed", st.curtailed},
                     {"v_min", st.v_min},
                     {"v_max", st.v_max},
                     {"outer_iters", st.outer_iters},
                     {"inner_iters", st.inner_iters},
                     {"solve_seconds", st.solve_seconds}});
  }
  json doc = {{"policy", sc.policy.type == PolicyType::Rule ? "rule" : "dcopf"},
              {"warm_start", sc.policy.warm_start},
              {"horizon", sc.horizon},
              {"energy_available", rep.energy_available},
              {"energy_integrated", rep.energy_integrated},
              {"energy_curtailed", rep.energy_curtailed},
              {"interventions", rep.interventions},
              {"fallbacks", rep.fallbacks},
              {"v_lowest", rep.v_lowest},
              {"v_highest", rep.v_highest},
              {"mean_inner_iters", rep.mean_inner_iters()},
              {"steps", steps}};
  return doc.dump(2);
}

void write_voltage_csv(std::ostream& out, const SimReport& rep, const GridModel& grid) {
  out << "step,bus_id,v_mag\n";
  out.precision(10);
  for (const auto& st : rep.steps) {
    for (std::size_t k = 0; k < st.v_mag.size(); ++k) {
      out << st.step << ',' << grid.buses[k].id << ',' << st.v_mag[k] << '\n';
    }
  }
}

}  // namespace dcflow
