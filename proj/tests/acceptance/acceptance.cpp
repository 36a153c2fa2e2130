// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "alloc_probe.hpp"
#include "dcflow/bench.hpp"
#include "dcflow/dca.hpp"
#include "dcflow/feeder.hpp"
#include "dcflow/perturb.hpp"
#include "dcflow/power_flow.hpp"
#include "dcflow/simulation.hpp"
#include "dcflow/verify.hpp"
#include "test_support.hpp"

namespace {

using namespace dcflow;

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Case30Run {
  QclpProblem qp;
  DcaResult res;
  double start_violation = 0.0;
  double seconds = 0.0;
  int first_hit = -1;  ///< first k with t_actual below the threshold
  long inner_to_hit = 0;
};

constexpr double kTarget = 1e-4;

Case30Run run_case30(int inner_iters) {
  const GridModel g = testing::load_case("case30");
  const auto y = build_admittance(g);
  const ReferencePoint ref = load_reference_point(testing::data_path("reference/case30_opf.json"), g);
  PerturbSpec spec;
  spec.seed = 1;
  spec.target_violation = 1.0;
  const PerturbResult pert = perturb(ref.point, g, spec);

  Case30Run run;
  run.start_violation = pert.violation;
  const auto t0 = std::chrono::steady_clock::now();
  run.qp = assemble_qclp(g, y, pert.point);
  const auto splits = split_all(run.qp, y);
  DcaParams p;
  p.inner_iters = inner_iters;
  run.res = dca_solve(run.qp, splits, p);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& r : run.res.history) {
    run.inner_to_hit += r.inner_iters;
    if (r.t_actual < kTarget) {
      run.first_hit = r.k;
      break;
    }
  }
  return run;
}

void criterion_7() {
  const GridModel g = testing::load_case("case9");
  const auto y = build_admittance(g);
  PerturbSpec spec;
  spec.magnitude = 0.02;
  const OperatingPoint op = perturb(solve_power_flow(g).point, g, spec).point;
  const QclpProblem qp = assemble_qclp(g, y, op);
  const auto splits = split_all(qp, y);
  const LiftedProblem lp = linearize(qp, splits, with_tight_slacks(qp, Vector(qp.z_dim, 0.0)), 1.0);
  InnerOptions opts;
  opts.max_iters = 50000;
  const InnerSolution sol = solve_inner(lp, {}, opts);

  double worst = 0.0;
  for (int j = 0; j < lp.z_dim; ++j) worst = std::max(worst, std::abs(sol.x[j] * sol.x[j] - sol.y[j]));
  const std::span<const double> z(sol.x.data(), lp.z_dim);
  const double tight = lifted_objective(lp, z, sol.y);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 0.05);
  double worst_gain = -kUnbounded;
  Vector loose(lp.z_dim);
  for (int trial = 0; trial < 200; ++trial) {
    for (int j = 0; j < lp.z_dim; ++j) loose[j] = sol.y[j] + dist(rng);
    worst_gain = std::max(worst_gain, tight - lifted_objective(lp, z, loose));
  }
  report(7, sol.converged && worst == 0.0 && worst_gain <= 0.0,
         fmt("converged=%d iters=%d max|z.z-y|=%g tight-minus-loose=%g", sol.converged,
             sol.iterations, worst, worst_gain));
}

void criterion_8() {
  std::vector<ScalingCase> cases;
  for (const char* n : {"case9", "case30", "case57", "case118"}) cases.push_back({n, testing::load_case(n)});
  FeederSpec spec;
  spec.num_buses = 1000;
  cases.push_back({"feeder1000", radial_feeder(spec)});
  const ScalingReport rep = measure_scaling(cases, 200, 3, alloc::probe());
  std::string pts;
  for (const auto& p : rep.points) {
    pts += fmt(" %s:%d/%.2gus/%zuKiB", p.name.c_str(), p.size, p.seconds_per_iter * 1e6,
               p.peak_bytes / 1024);
  }
  report(8, rep.time_slope <= 1.2 && rep.memory_slope <= 1.2,
         fmt("time slope %.3f, memory slope %.3f;", rep.time_slope, rep.memory_slope) + pts);
}

void criteria_9_10() {
  const SimScenario base = load_scenario(testing::data_path("scenarios/feeder18.json"));
  SimScenario warm = base;
  warm.policy.type = PolicyType::DcOpf;
  warm.policy.warm_start = true;
  SimScenario cold = warm;
  cold.policy.warm_start = false;
  SimScenario rule = base;
  rule.policy.type = PolicyType::Rule;
  rule.policy.fraction = 0.5;

  const SimReport rw = run_simulation(warm);
  const SimReport rc = run_simulation(cold);
  const SimReport rr = run_simulation(rule);

  const double saving = 1.0 - rw.mean_inner_iters() / rc.mean_inner_iters();
  report(9, rw.fallbacks == 0 && rc.fallbacks == 0 && saving >= 0.25,
         fmt("mean inner iterations warm %.0f, cold %.0f (%.1f%% fewer); fallbacks %d/%d",
             rw.mean_inner_iters(), rc.mean_inner_iters(), 100 * saving, rw.fallbacks,
             rc.fallbacks));

  bool band = true;
  for (const auto& st : rw.steps) band = band && st.v_min >= 0.9 && st.v_max <= 1.07;
  report(10, band && rw.energy_integrated > rr.energy_integrated,
         fmt("integrated opf %.5f vs rule %.5f p.u.h; opf voltages [%.5f, %.5f]",
             rw.energy_integrated, rr.energy_integrated, rw.v_lowest, rw.v_highest));
}

}  // namespace

int main() {
  try {
    const Case30Run c1 = run_case30(10000);
    const auto& h1 = c1.res.history;
    report(1,
           std::abs(c1.start_violation - 1.0) <= 0.1 && c1.first_hit >= 0 && c1.first_hit + 1 <= 30 &&
               c1.seconds <= 60.0,
           fmt("start violation %.3f; t_actual < %g after %d outer iterations; %.1f s; run status %s",
               c1.start_violation, kTarget, c1.first_hit + 1, c1.seconds, to_string(c1.res.status)));

    const Case30Run c2 = run_case30(100);
    report(2,
           c2.first_hit >= 0 && c2.first_hit > c1.first_hit && c2.inner_to_hit < c1.inner_to_hit,
           fmt("inner cap 100: hit after %d outer iterations (vs %d), inner total %ld (vs %ld)",
               c2.first_hit + 1, c1.first_hit + 1, c2.inner_to_hit, c1.inner_to_hit));

    double worst_rise = 0.0;
    int worst_k = -1;
    for (std::size_t k = 1; k < h1.size(); ++k) {
      const double rise = h1[k].inner_value - h1[k - 1].inner_value;
      if (rise > worst_rise) {
        worst_rise = rise;
        worst_k = static_cast<int>(k);
      }
    }
    report(3, worst_rise <= 1e-9,
           fmt("largest rise of the subproblem value %.3g at k=%d (beta %g -> %g)", worst_rise,
               worst_k, worst_k > 0 ? h1[worst_k - 1].beta : 0.0, worst_k > 0 ? h1[worst_k].beta : 0.0));

    double eig_err = 0.0;
    double min_eig = kUnbounded;
    for (const char* n : {"case9", "case14", "case30", "case57", "case118"}) {
      const EigenCheck e = check_power_eigs(testing::load_case(n));
      eig_err = std::max(eig_err, e.max_rel_error);
      min_eig = std::min(min_eig, e.min_concave_eig);
    }
    report(4, eig_err <= 1e-9 && min_eig >= -1e-10,
           fmt("analytic vs Jacobi rel err %.3g; min eig of concave part %.3g", eig_err, min_eig));

    const double g9 = check_dual_gradient(testing::load_case("case9"), 100, 1);
    const double g30 = check_dual_gradient(testing::load_case("case30"), 100, 1);
    report(5, g9 <= 1e-5 && g30 <= 1e-5,
           fmt("gradient vs central differences: case9 %.3g, case30 %.3g", g9, g30));

    const GridModel c9 = testing::load_case("case9");
    const double dp = check_delta_power(c9, 1000, 1);
    const double ev = check_constraint_eval(c9, 1000, 1);
    report(6, dp <= 1e-10 && ev <= 1e-10,
           fmt("delta_power vs dense %.3g; sparse vs dense rows %.3g", dp, ev));

    criterion_7();
    criterion_8();
    criteria_9_10();

    const KktResidual kkt = kkt_residual(c1.qp, c1.res.x, c1.res.lambda_orig);
    report(11, kkt.stationarity <= 1e-3 && kkt.complementarity <= 1e-3,
           fmt("stationarity %.3g, complementarity %.3g", kkt.stationarity, kkt.complementarity));
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
