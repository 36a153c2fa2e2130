#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "alloc_probe.hpp"
#include "dcflow/bench.hpp"
#include "dcflow/dc_split.hpp"
#include "dcflow/dca.hpp"
#include "dcflow/errors.hpp"
#include "dcflow/feeder.hpp"
#include "dcflow/perturb.hpp"
#include "dcflow/qclp.hpp"
#include "dcflow/simulation.hpp"
#include "dcflow/verify.hpp"
#include "json.hpp"

namespace {

using namespace dcflow;
using nlohmann::json;

constexpr int kExitConverged = 0;
constexpr int kExitFailure = 1;
constexpr int kExitIterLimit = 2;
constexpr int kExitInput = 3;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path, 0);
  out << text << '\n';
}

struct SolveArgs {
  std::string case_path;
  std::optional<double> perturb;
  std::optional<double> target;
  std::uint64_t seed = 1;
  std::optional<int> inner_iters;
  std::string reference;
  std::string json_out;
  std::string history_out;
  bool reproducible = false;
  DcaParams params;
};

int run_solve(const SolveArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const GridModel grid = load_grid(a.case_path);
  const auto y = build_admittance(grid);

  const ReferencePoint ref = a.reference.empty() ? reference_operating_point(grid)
                                                 : load_reference_point(a.reference, grid);
  OperatingPoint start = ref.point;
  PerturbResult pert;
  pert.point = ref.point;
  pert.violation = ref.violation;
  if (a.perturb || a.target) {
    PerturbSpec spec;
    spec.seed = a.seed;
    spec.magnitude = a.perturb.value_or(0.0);
    spec.target_violation = a.target;
    pert = perturb(ref.point, grid, spec);
    start = pert.point;
  }

  DcaParams params = a.params;
  params.inner_iters = a.inner_iters.value_or(default_inner_iters(grid.num_buses()));
  try {
    params.validate();
  } catch (const SolverError& e) {
    throw ModelError(e.what());
  }
  const QclpProblem qp = assemble_qclp(grid, y, start);
  const auto splits = split_all(qp, y);
  const auto t1 = std::chrono::steady_clock::now();
  const DcaResult res = dca_solve(qp, splits, params);
  const auto t2 = std::chrono::steady_clock::now();
  const KktResidual kkt = kkt_residual(qp, res.x, res.lambda_orig);

  std::cout << std::setprecision(6) << "case        " << a.case_path << " (" << grid.num_buses()
            << " buses, " << grid.num_branches() << " branches)\n"
            << "start       violation " << pert.violation << " p.u., magnitude "
            << pert.magnitude << "\n"
            << "status      " << to_string(res.status) << "\n"
            << "outer       " << res.outer_iters << ", inner total " << res.total_inner_iters()
            << "\n"
            << "objective   " << res.objective << "\n"
            << "violation   " << res.max_violation << " p.u.\n"
            << "kkt         stationarity " << kkt.stationarity << ", complementarity "
            << kkt.complementarity << "\n";
  if (!a.reproducible) {
    std::cout << "time        " << std::chrono::duration<double>(t2 - t1).count() << " s solve, "
              << std::chrono::duration<double>(t2 - t0).count() << " s total\n";
  }

  if (!a.history_out.empty()) {
    std::ofstream out(a.history_out);
    if (!out) throw ParseError("cannot write " + a.history_out, 0);
    write_history_csv(out, res.history);
  }
  if (!a.json_out.empty()) {
    json hist = json::array();
    for (const auto& r : res.history) {
      hist.push_back({{"k", r.k},
                      {"objective", r.objective},
                      {"t_inner", r.t_inner},
                      {"t_actual", r.t_actual},
                      {"dx_norm", r.dx_norm},
                      {"beta", r.beta},
                      {"inner_iters", r.inner_iters},
                      {"inner_value", r.inner_value}});
    }
    const int m = grid.num_buses();
    Vector v_re(m), v_im(m);
    for (int k = 0; k < m; ++k) {
      v_re[k] = start.v[k].real() + res.x[k];
      v_im[k] = start.v[k].imag() + res.x[m + k];
    }
    json doc = {{"case", a.case_path},
                {"seed", a.seed},
                {"start_violation", pert.violation},
                {"perturb_magnitude", pert.magnitude},
                {"status", to_string(res.status)},
                {"outer_iters", res.outer_iters},
                {"inner_iters_total", res.total_inner_iters()},
                {"objective", res.objective},
                {"max_violation", res.max_violation},
                {"kkt_stationarity", kkt.stationarity},
                {"kkt_complementarity", kkt.complementarity},
                {"params",
                 {{"beta0", params.beta0},
                  {"delta1", params.delta1},
                  {"delta2", params.delta2},
                  {"eps_x", params.eps_x},
                  {"eps_t", params.eps_t},
                  {"max_outer", params.max_outer},
                  {"inner_iters", params.inner_iters}}},
                {"history", hist},
                {"v_re", v_re},
                {"v_im", v_im}};
    if (!a.reproducible) doc["solve_seconds"] = std::chrono::duration<double>(t2 - t1).count();
    write_file(a.json_out, doc.dump(2));
  }
  return res.status == DcaStatus::Converged ? kExitConverged : kExitIterLimit;
}

struct SimArgs {
  std::string scenario;
  std::string policy;
  std::optional<double> fraction;
  std::optional<int> inner_iters;
  bool cold = false;
  std::string json_out;
  std::string csv_out;
};

int run_simulate(const SimArgs& a) {
  SimScenario sc = load_scenario(a.scenario);
  if (a.policy == "rule") sc.policy.type = PolicyType::Rule;
  if (a.policy == "dcopf") sc.policy.type = PolicyType::DcOpf;
  if (a.fraction) sc.policy.fraction = *a.fraction;
  if (a.inner_iters) sc.policy.inner_iters = *a.inner_iters;
  if (a.cold) sc.policy.warm_start = false;
  sc.validate();

  const SimReport rep = run_simulation(sc);
  double solve_seconds = 0.0;
  for (const auto& st : rep.steps) solve_seconds += st.solve_seconds;
  std::cout << std::setprecision(6)
            << "policy        " << (sc.policy.type == PolicyType::Rule ? "rule" : "dcopf") << "\n"
            << "steps         " << sc.horizon << ", interventions " << rep.interventions
            << ", fallbacks " << rep.fallbacks << "\n"
            << "energy        available " << rep.energy_available << ", integrated "
            << rep.energy_integrated << ", curtailed " << rep.energy_curtailed << " p.u.h\n"
            << "voltage       [" << rep.v_lowest << ", " << rep.v_highest << "] p.u.\n";
  if (!rep.solve_inner_iters.empty()) {
    std::cout << "solves        " << rep.solve_inner_iters.size() << ", mean inner iterations "
              << rep.mean_inner_iters() << ", " << solve_seconds << " s\n";
  }
  if (!a.json_out.empty()) write_file(a.json_out, report_to_json(rep, sc));
  if (!a.csv_out.empty()) {
    std::ofstream out(a.csv_out);
    if (!out) throw ParseError("cannot write " + a.csv_out, 0);
    write_voltage_csv(out, rep, sc.grid);
  }
  return rep.fallbacks == 0 ? kExitConverged : kExitIterLimit;
}

// "feeder:N" names a synthetic radial feeder with N buses.
ScalingCase scaling_case(const std::string& name) {
  const std::string prefix = "feeder:";
  if (name.rfind(prefix, 0) == 0) {
    FeederSpec spec;
    try {
      spec.num_buses = std::stoi(name.substr(prefix.size()));
    } catch (const std::exception&) {
      throw ParseError("bad feeder size in '" + name + "'", 0);
    }
    return {name, radial_feeder(spec)};
  }
  return {name, load_grid(name)};
}

int run_bench(const std::vector<std::string>& cases, int iters, int repeats,
              const std::string& json_out) {
  std::vector<ScalingCase> list;
  for (const auto& c : cases) list.push_back(scaling_case(c));
  const ScalingReport rep = measure_scaling(list, iters, repeats, alloc::probe());
  std::cout << std::left << std::setw(28) << "case" << std::right << std::setw(8) << "M+L"
            << std::setw(16) << "us/iter" << std::setw(14) << "peak KiB" << "\n";
  for (const auto& p : rep.points) {
    std::cout << std::left << std::setw(28) << p.name << std::right << std::setw(8) << p.size
              << std::setw(16) << std::fixed << std::setprecision(2) << p.seconds_per_iter * 1e6
              << std::setw(14) << std::setprecision(1) << p.peak_bytes / 1024.0 << "\n";
  }
  std::cout.unsetf(std::ios::fixed);
  if (rep.points.size() >= 2) {
    std::cout << std::setprecision(3) << "slope time " << rep.time_slope << ", memory "
              << rep.memory_slope << "\n";
  } else {
    std::cout << "slope undefined for a single case\n";
  }
  if (!json_out.empty()) write_file(json_out, scaling_to_json(rep));
  return kExitConverged;
}

int run_verify(const std::string& path, std::uint64_t seed, const std::string& json_out) {
  const GridModel grid = load_grid(path);
  const VerifyReport r = verify_grid(grid, seed);
  std::cout << std::setprecision(3) << "eigenvalues      " << r.eigs.matrices
            << " matrices, max rel error " << r.eigs.max_rel_error << "\n"
            << "concave part     min eigenvalue " << r.eigs.min_concave_eig << "\n"
            << "delta power      max error " << r.delta_power << "\n"
            << "constraint eval  max error " << r.constraint_eval << "\n"
            << "dual gradient    max rel error " << r.dual_gradient << "\n"
            << (r.passed ? "PASS" : "FAIL") << "\n";
  if (!json_out.empty()) write_file(json_out, verify_to_json(r));
  return r.passed ? kExitConverged : kExitIterLimit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution grid OPF by difference-of-convex programming"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* cmd_solve = app.add_subcommand("solve", "Solve one OPF instance from a (perturbed) start");
  cmd_solve->add_option("case", solve.case_path, "MATPOWER .m or grid .json file")->required();
  auto* opt_perturb =
      cmd_solve->add_option("--perturb", solve.perturb, "Relative voltage perturbation")
          ->check(CLI::NonNegativeNumber);
  cmd_solve
      ->add_option("--target-violation", solve.target, "Scale the perturbation to this violation")
      ->check(CLI::PositiveNumber)
      ->excludes(opt_perturb);
  cmd_solve->add_option("--seed", solve.seed, "Perturbation seed")->capture_default_str();
  cmd_solve->add_option("--inner-iters", solve.inner_iters, "Inner iteration cap")
      ->check(CLI::PositiveNumber);
  cmd_solve->add_option("--reference", solve.reference,
                        "Voltage JSON to perturb instead of the power-flow point");
  cmd_solve->add_option("--max-outer", solve.params.max_outer)->capture_default_str();
  cmd_solve->add_option("--beta0", solve.params.beta0)->capture_default_str();
  cmd_solve->add_option("--delta1", solve.params.delta1)->capture_default_str();
  cmd_solve->add_option("--delta2", solve.params.delta2)->capture_default_str();
  cmd_solve->add_option("--eps-x", solve.params.eps_x)->capture_default_str();
  cmd_solve->add_option("--eps-t", solve.params.eps_t)->capture_default_str();
  cmd_solve->add_option("--json", solve.json_out, "Write a JSON report");
  cmd_solve->add_option("--history", solve.history_out, "Write the outer history as CSV");
  cmd_solve->add_flag("--reproducible", solve.reproducible, "Omit timings from the output");

  SimArgs sim;
  auto* cmd_sim = app.add_subcommand("simulate", "Run a curtailment time series");
  cmd_sim->add_option("scenario", sim.scenario, "Scenario JSON")->required();
  cmd_sim->add_option("--policy", sim.policy, "Override the scenario policy")
      ->check(CLI::IsMember({"rule", "dcopf"}));
  cmd_sim->add_option("--fraction", sim.fraction, "Rule policy in-feed cap");
  cmd_sim->add_option("--inner-iters", sim.inner_iters)->check(CLI::PositiveNumber);
  cmd_sim->add_flag("--cold", sim.cold, "Disable warm starts between solves");
  cmd_sim->add_option("--json", sim.json_out, "Write a JSON report");
  cmd_sim->add_option("--csv", sim.csv_out, "Write voltage traces as CSV");

  std::vector<std::string> bench_cases;
  int bench_iters = 200;
  int bench_repeats = 3;
  std::string bench_json;
  auto* cmd_bench = app.add_subcommand("bench", "Per-iteration time and memory vs grid size");
  cmd_bench->add_option("cases", bench_cases, "Case files, or feeder:N for a synthetic feeder")
      ->required();
  cmd_bench->add_option("--iters", bench_iters)->check(CLI::PositiveNumber)->capture_default_str();
  cmd_bench->add_option("--repeats", bench_repeats)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_bench->add_option("--json", bench_json, "Write the scaling table as JSON");

  std::string verify_case;
  std::uint64_t verify_seed = 1;
  std::string verify_json;
  auto* cmd_verify = app.add_subcommand("verify", "Check a case against the dense oracle");
  cmd_verify->add_option("case", verify_case)->required();
  cmd_verify->add_option("--seed", verify_seed)->capture_default_str();
  cmd_verify->add_option("--json", verify_json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*cmd_solve) return run_solve(solve);
    if (*cmd_sim) return run_simulate(sim);
    if (*cmd_bench) return run_bench(bench_cases, bench_iters, bench_repeats, bench_json);
    if (*cmd_verify) return run_verify(verify_case, verify_seed, verify_json);
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ModelError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DimensionError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
