#include <cmath>

#include "dcflow/errors.hpp"
#include "dcflow/grid.hpp"
#include "json.hpp"

namespace dcflow {
namespace {

using nlohmann::json;

// JSON has no infinity; unbounded limits are written as null.
json limit_to_json(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

double limit_from_json(const json& obj, const char* key, double unbounded) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return unbounded;
  return it->get<double>();
}

const char* kind_name(BusKind k) {
  switch (k) {
    case BusKind::PV: return "pv";
    case BusKind::Slack: return "slack";
    default: return "pq";
  }
}

BusKind kind_from_name(const std::string& s) {
  if (s == "pq") return BusKind::PQ;
  if (s == "pv") return BusKind::PV;
  if (s == "slack") return BusKind::Slack;
  throw ParseError("unknown bus kind '" + s + "'", 0);
}

}  // namespace

std::string grid_to_json(const GridModel& grid) {
  json buses = json::array();
  for (const auto& b : grid.buses) {
    buses.push_back({{"id", b.id},
                     {"v_min", limit_to_json(b.v_min)},
                     {"v_max", limit_to_json(b.v_max)},
                     {"p_min", limit_to_json(b.p_min)},
                     {"p_max", limit_to_json(b.p_max)},
                     {"q_min", limit_to_json(b.q_min)},
                     {"q_max", limit_to_json(b.q_max)},
                     {"g_sh", b.shunt.real()},
                     {"b_sh", b.shunt.imag()},
                     {"slack", b.is_slack},
                     {"kind", kind_name(b.kind)},
                     {"p_set", b.p_set},
                     {"q_set", b.q_set},
                     {"v_set", b.v_set}});
  }
  json branches = json::array();
  for (const auto& br : grid.branches) {
    branches.push_back({{"from", grid.buses[br.from].id},
                        {"to", grid.buses[br.to].id},
                        {"r", br.impedance.real()},
                        {"x", br.impedance.imag()},
                        {"i_max", limit_to_json(br.i_max)}});
  }
  json doc = {{"base_mva", grid.base_mva}, {"buses", buses}, {"branches", branches}};
  return doc.dump(2);
}

GridModel grid_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), 0);
  }
  try {
    GridModel grid;
    grid.base_mva = doc.value("base_mva", 100.0);
    for (const auto& jb : doc.at("buses")) {
      Bus b;
      b.id = jb.at("id").get<int>();
      b.v_min = limit_from_json(jb, "v_min", 0.0);
      b.v_max = limit_from_json(jb, "v_max", kUnbounded);
      b.p_min = limit_from_json(jb, "p_min", -kUnbounded);
      b.p_max = limit_from_json(jb, "p_max", kUnbounded);
      b.q_min = limit_from_json(jb, "q_min", -kUnbounded);
      b.q_max = limit_from_json(jb, "q_max", kUnbounded);
      b.shunt = Complex(jb.value("g_sh", 0.0), jb.value("b_sh", 0.0));
      b.is_slack = jb.value("slack", false);
      b.kind = kind_from_name(jb.value("kind", b.is_slack ? "slack" : "pq"));
      b.p_set = jb.value("p_set", 0.0);
      b.q_set = jb.value("q_set", 0.0);
      b.v_set = jb.value("v_set", 1.0);
      grid.buses.push_back(b);
    }
    for (const auto& jl : doc.at("branches")) {
      Branch br;
      const int from_id = jl.at("from").get<int>();
      const int to_id = jl.at("to").get<int>();
      br.from = grid.index_of(from_id);
      br.to = grid.index_of(to_id);
      if (br.from < 0 || br.to < 0) throw ParseError("branch references unknown bus id", 0);
      br.impedance = Complex(jl.at("r").get<double>(), jl.at("x").get<double>());
      br.i_max = limit_from_json(jl, "i_max", kUnbounded);
      grid.branches.push_back(br);
    }
    grid.validate();
    return grid;
  } catch (const json::exception& e) {
    throw ParseError(std::string("grid JSON: ") + e.what(), 0);
  }
}

}  // namespace dcflow
