#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "dcflow/errors.hpp"
#include "dcflow/grid.hpp"

namespace dcflow {
namespace {

struct NumericBlock {
  std::vector<std::vector<double>> rows;
  std::vector<int> row_lines;
  int line = 0;
};

std::string_view strip_comment(std::string_view s) {
  const auto pos = s.find('%');
  return pos == std::string_view::npos ? s : s.substr(0, pos);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(std::string_view tok, int line) {
  if (tok == "Inf" || tok == "inf" || tok == "+Inf") return kUnbounded;
  if (tok == "-Inf" || tok == "-inf") return -kUnbounded;
  double value = 0.0;
  const char* first = tok.data();
  if (!tok.empty() && tok.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("invalid number '" + std::string(tok) + "'", line);
  }
  return value;
}

// Splits the text of a matrix block into rows of numbers. Rows end at ';'
// or at a line break.
void append_rows(std::string_view body, int line, NumericBlock& block,
                 std::vector<double>& current) {
  std::size_t i = 0;
  auto flush = [&] {
    if (!current.empty()) {
      block.rows.push_back(std::move(current));
      block.row_lines.push_back(line);
      current.clear();
    }
  };
  while (i < body.size()) {
    const char c = body[i];
    if (c == ';') {
      flush();
      ++i;
    } else if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
      ++i;
    } else {
      const auto end = body.find_first_of(" \t,;\r", i);
      const auto tok = body.substr(i, end == std::string_view::npos ? end : end - i);
      current.push_back(parse_number(tok, line));
      i = end == std::string_view::npos ? body.size() : end;
    }
  }
  flush();
}

struct CaseBlocks {
  std::optional<double> base_mva;
  std::map<std::string, NumericBlock> blocks;
};

CaseBlocks scan_case(std::string_view text) {
  CaseBlocks out;
  std::string open_name;
  NumericBlock open_block;
  std::vector<double> pending;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                    : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    auto line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (!open_name.empty()) {
      const auto close = line.find(']');
      append_rows(line.substr(0, close), line_no, open_block, pending);
      if (close != std::string_view::npos) {
        out.blocks[open_name] = std::move(open_block);
        open_block = {};
        open_name.clear();
      }
      continue;
    }

    if (!line.starts_with("mpc.")) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected '=' after field name", line_no);
    const auto name = std::string(trim(line.substr(4, eq - 4)));
    auto rhs = trim(line.substr(eq + 1));
    if (name == "baseMVA") {
      if (!rhs.empty() && rhs.back() == ';') rhs.remove_suffix(1);
      out.base_mva = parse_number(trim(rhs), line_no);
      continue;
    }
    if (rhs.empty() || rhs.front() != '[') continue;  // strings, version, etc.
    rhs.remove_prefix(1);
    open_block = {};
    open_block.line = line_no;
    const auto close = rhs.find(']');
    append_rows(rhs.substr(0, close), line_no, open_block, pending);
    if (close != std::string_view::npos) {
      out.blocks[name] = std::move(open_block);
      open_block = {};
    } else {
      open_name = name;
    }
  }
  if (!open_name.empty()) {
    throw ParseError("unterminated matrix block mpc." + open_name, open_block.line);
  }
  return out;
}

const NumericBlock& require_block(const CaseBlocks& c, const std::string& name,
                                  std::size_t min_cols) {
  const auto it = c.blocks.find(name);
  if (it == c.blocks.end()) throw ParseError("missing mpc." + name + " block", 0);
  const auto& block = it->second;
  for (std::size_t r = 0; r < block.rows.size(); ++r) {
    if (block.rows[r].size() < min_cols) {
      throw ParseError("mpc." + name + " row has " + std::to_string(block.rows[r].size()) +
                           " columns, expected at least " + std::to_string(min_cols),
                       block.row_lines[r]);
    }
  }
  return block;
}

}  // namespace

GridModel parse_matpower(std::string_view text) {
  const CaseBlocks c = scan_case(text);
  if (!c.base_mva) throw ParseError("missing mpc.baseMVA", 0);
  const double base = *c.base_mva;
  if (!(base > 0.0)) throw ModelError("baseMVA must be positive");

  // Column layouts of the version 2 case format (0-based).
  enum { BUS_I, BUS_TYPE, PD, QD, GS, BS, VM = 7, VMAX = 11, VMIN = 12 };
  enum { GEN_BUS, PG, QG, QMAX, QMIN, VG, GEN_STATUS = 7, PMAX = 8, PMIN = 9 };
  enum { F_BUS, T_BUS, BR_R, BR_X, BR_B, RATE_A, TAP = 8, SHIFT = 9, BR_STATUS = 10 };

  const auto& bus_block = require_block(c, "bus", 13);
  const auto& gen_block = require_block(c, "gen", 10);
  const auto& branch_block = require_block(c, "branch", 11);

  GridModel grid;
  grid.base_mva = base;
  std::map<int, int> index_of;
  std::vector<double> pd, qd;
  std::vector<bool> has_slack_type;
  for (std::size_t r = 0; r < bus_block.rows.size(); ++r) {
    const auto& row = bus_block.rows[r];
    Bus b;
    b.id = static_cast<int>(row[BUS_I]);
    if (index_of.count(b.id)) throw ParseError("duplicate bus id", bus_block.row_lines[r]);
    index_of[b.id] = static_cast<int>(grid.buses.size());
    const int type = static_cast<int>(row[BUS_TYPE]);
    b.is_slack = type == 3;
    b.kind = type == 3 ? BusKind::Slack : type == 2 ? BusKind::PV : BusKind::PQ;
    b.v_min = row[VMIN];
    b.v_max = row[VMAX];
    b.shunt = -Complex(row[GS], row[BS]) / base;
    b.v_set = row[VM];
    pd.push_back(row[PD] / base);
    qd.push_back(row[QD] / base);
    grid.buses.push_back(b);
  }

  const int m = grid.num_buses();
  std::vector<double> pg_min(m, 0.0), pg_max(m, 0.0), qg_min(m, 0.0), qg_max(m, 0.0);
  std::vector<double> pg(m, 0.0), qg(m, 0.0);
  std::vector<int> gen_count(m, 0);
  for (std::size_t r = 0; r < gen_block.rows.size(); ++r) {
    const auto& row = gen_block.rows[r];
    const auto it = index_of.find(static_cast<int>(row[GEN_BUS]));
    if (it == index_of.end()) throw ParseError("generator at unknown bus", gen_block.row_lines[r]);
    if (row[GEN_STATUS] <= 0) continue;
    const int k = it->second;
    pg_min[k] += row[PMIN] / base;
    pg_max[k] += row[PMAX] / base;
    qg_min[k] += row[QMIN] / base;
    qg_max[k] += row[QMAX] / base;
    pg[k] += row[PG] / base;
    qg[k] += row[QG] / base;
    if (gen_count[k]++ == 0) grid.buses[k].v_set = row[VG];
  }

  for (int k = 0; k < m; ++k) {
    auto& b = grid.buses[k];
    // Withdrawal convention: s = load - generation.
    b.p_set = pd[k] - pg[k];
    b.q_set = qd[k] - qg[k];
    if (b.is_slack) {
      b.p_min = b.q_min = -kUnbounded;
      b.p_max = b.q_max = kUnbounded;
      continue;
    }
    if (gen_count[k] == 0 && b.kind == BusKind::PV) b.kind = BusKind::PQ;
    b.p_min = pd[k] - pg_max[k];
    b.p_max = pd[k] - pg_min[k];
    b.q_min = qd[k] - qg_max[k];
    b.q_max = qd[k] - qg_min[k];
  }

  for (std::size_t r = 0; r < branch_block.rows.size(); ++r) {
    const auto& row = branch_block.rows[r];
    const int line = branch_block.row_lines[r];
    if (row[BR_STATUS] <= 0) continue;
    const auto f = index_of.find(static_cast<int>(row[F_BUS]));
    const auto t = index_of.find(static_cast<int>(row[T_BUS]));
    if (f == index_of.end() || t == index_of.end()) {
      throw ParseError("branch references unknown bus", line);
    }
    if (row[SHIFT] != 0.0) throw ModelError("line " + std::to_string(line) +
                                            ": phase-shifting transformers are not supported");
    const Complex z(row[BR_R], row[BR_X]);
    if (std::abs(z) == 0.0) {
      throw ModelError("line " + std::to_string(line) + ": zero impedance branch");
    }
    const double tap = row[TAP] == 0.0 ? 1.0 : row[TAP];
    const Complex y = 1.0 / z;
    const Complex charging(0.0, 0.5 * row[BR_B]);

    Branch br;
    br.from = f->second;
    br.to = t->second;
    br.impedance = z * tap;
    br.i_max = row[RATE_A] == 0.0 ? kUnbounded : row[RATE_A] / base;

    // Pi-equivalent of the (possibly off-nominal) branch; shunts negated to
    // match the admittance sign convention.
    const Complex from_shunt = (charging + y * (1.0 - tap)) / (tap * tap);
    const Complex to_shunt = charging + y * (tap - 1.0) / tap;
    grid.buses[br.from].shunt -= from_shunt;
    grid.buses[br.to].shunt -= to_shunt;
    grid.branches.push_back(br);
  }

  grid.validate();
  return grid;
}

}  // namespace dcflow
