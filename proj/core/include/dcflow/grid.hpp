#pragma once

#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcflow/sparse.hpp"

namespace dcflow {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Role of a bus in a conventional power-flow computation. Only used to
/// produce uncontrolled operating points; the optimizer ignores it.
enum class BusKind { PQ, PV, Slack };

// Sign convention: the admittance matrix follows
//   Y_jl = y_jl (j != l),  Y_jj = y_sh_j - sum_k y_jk,
// and s = diag(v) conj(Y) conj(v). With `shunt` holding the negated physical
// shunt admittance, Y is the negated textbook bus admittance matrix and s is
// the complex power withdrawn at each bus (loads positive, in-feed negative).
// All bounds and schedules below use that sign.
struct Bus {
  int id = 0;  ///< External (1-based, file) identifier.
  double v_min = 0.0;
  double v_max = kUnbounded;
  double p_min = -kUnbounded;
  double p_max = kUnbounded;
  double q_min = -kUnbounded;
  double q_max = kUnbounded;
  Complex shunt{};
  bool is_slack = false;

  BusKind kind = BusKind::PQ;
  double p_set = 0.0;  ///< Scheduled withdrawal for power flow.
  double q_set = 0.0;
  double v_set = 1.0;  ///< Voltage magnitude setpoint for PV/slack buses.

  bool operator==(const Bus&) const = default;
};

struct Branch {
  int from = 0;  ///< Internal (0-based) bus index.
  int to = 0;
  Complex impedance{};  ///< Series r + jx (p.u.).
  double i_max = kUnbounded;

  Complex admittance() const { return 1.0 / impedance; }
  bool operator==(const Branch&) const = default;
};

struct GridModel {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  double base_mva = 100.0;

  int num_buses() const { return static_cast<int>(buses.size()); }
  int num_branches() const { return static_cast<int>(branches.size()); }
  int slack_index() const;
  int index_of(int bus_id) const;
  /// Maximum number of distinct neighbours over all buses.
  int max_degree() const;
  bool is_connected() const;

  /// Throws ModelError on hard violations; returns warnings (e.g. islands).
  std::vector<std::string> validate() const;

  bool operator==(const GridModel&) const = default;
};

struct OperatingPoint {
  ComplexVector v;
  ComplexVector s;
};

/// Restricted MATPOWER (version 2) case parser. Only numeric matrix blocks
/// `mpc.bus`, `mpc.gen`, `mpc.branch` and the scalar `mpc.baseMVA` are read.
GridModel parse_matpower(std::string_view text);

GridModel grid_from_json(std::string_view text);
std::string grid_to_json(const GridModel& grid);

/// Reads `.m` (MATPOWER) or `.json` (canonical) files.
GridModel load_grid(const std::string& path);

SparseComplexMatrix build_admittance(const GridModel& grid);

/// s = diag(v) conj(Y) conj(v), O(nnz(Y)).
ComplexVector power_injections(const SparseComplexMatrix& y, std::span<const Complex> v);

}  // namespace dcflow
