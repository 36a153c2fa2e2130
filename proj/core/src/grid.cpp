#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dcflow/errors.hpp"
#include "dcflow/grid.hpp"

namespace dcflow {

int GridModel::slack_index() const {
  for (int i = 0; i < num_buses(); ++i) {
    if (buses[i].is_slack) return i;
  }
  return -1;
}

int GridModel::index_of(int bus_id) const {
  for (int i = 0; i < num_buses(); ++i) {
    if (buses[i].id == bus_id) return i;
  }
  return -1;
}

int GridModel::max_degree() const {
  std::vector<std::vector<int>> nbrs(buses.size());
  for (const auto& br : branches) {
    nbrs[br.from].push_back(br.to);
    nbrs[br.to].push_back(br.from);
  }
  int best = 0;
  for (auto& n : nbrs) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
    best = std::max(best, static_cast<int>(n.size()));
  }
  return best;
}

bool GridModel::is_connected() const {
  if (buses.empty()) return true;
  std::vector<int> parent(buses.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const auto& br : branches) parent[find(br.from)] = find(br.to);
  const int root = find(0);
  for (int i = 1; i < num_buses(); ++i) {
    if (find(i) != root) return false;
  }
  return true;
}

std::vector<std::string> GridModel::validate() const {
  if (num_buses() < 2) throw ModelError("grid needs at least two buses");
  int slack_count = 0;
  for (const auto& b : buses) {
    if (b.is_slack) ++slack_count;
    const std::string who = "bus " + std::to_string(b.id);
    if (!(b.v_min <= b.v_max)) throw ModelError(who + ": v_min > v_max");
    if (!(b.p_min <= b.p_max)) throw ModelError(who + ": p_min > p_max");
    if (!(b.q_min <= b.q_max)) throw ModelError(who + ": q_min > q_max");
  }
  if (slack_count == 0) throw ModelError("no slack bus");
  if (slack_count > 1) throw ModelError("more than one slack bus");
  for (std::size_t l = 0; l < branches.size(); ++l) {
    const auto& br = branches[l];
    const std::string who = "branch " + std::to_string(l + 1);
    if (br.from < 0 || br.from >= num_buses() || br.to < 0 || br.to >= num_buses()) {
      throw ModelError(who + ": endpoint out of range");
    }
    if (br.from == br.to) throw ModelError(who + ": from == to");
    if (std::abs(br.impedance) == 0.0) throw ModelError(who + ": zero impedance");
    if (!(br.i_max > 0.0)) throw ModelError(who + ": non-positive current limit");
  }
  std::vector<std::string> warnings;
  if (!is_connected()) warnings.emplace_back("grid graph is not connected");
  return warnings;
}

GridModel load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return is_json ? grid_from_json(buf.str()) : parse_matpower(buf.str());
}

SparseComplexMatrix build_admittance(const GridModel& grid) {
  const int m = grid.num_buses();
  std::vector<Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(m) + 4 * grid.branches.size());
  for (int k = 0; k < m; ++k) t.push_back({k, k, grid.buses[k].shunt});
  for (const auto& br : grid.branches) {
    const Complex y = br.admittance();
    t.push_back({br.from, br.to, y});
    t.push_back({br.to, br.from, y});
    t.push_back({br.from, br.from, -y});
    t.push_back({br.to, br.to, -y});
  }
  return SparseComplexMatrix::from_triplets(m, std::move(t));
}

ComplexVector power_injections(const SparseComplexMatrix& y, std::span<const Complex> v) {
  if (static_cast<int>(v.size()) != y.dim()) {
    throw DimensionError("voltage vector length does not match admittance matrix");
  }
  ComplexVector s(v.size());
  for (int k = 0; k < y.dim(); ++k) {
    const auto cols = y.row_cols(k);
    const auto vals = y.row_values(k);
    Complex current{};
    for (std::size_t p = 0; p < cols.size(); ++p) current += vals[p] * v[cols[p]];
    s[k] = v[k] * std::conj(current);
  }
  return s;
}

}  // namespace dcflow
