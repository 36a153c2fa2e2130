#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <string>

#include "dcflow/dc_split.hpp"
#include "dcflow/feeder.hpp"
#include "dcflow/inner_solver.hpp"
#include "dcflow/perturb.hpp"
#include "dcflow/power_flow.hpp"

namespace {

using namespace dcflow;

// Index 0..3 are bundled cases, 4 is a 1000-bus feeder.
const char* const kCases[] = {"case9", "case30", "case57", "case118"};

struct Fixture {
  GridModel grid;
  SparseComplexMatrix y;
  QclpProblem qp;
  std::vector<SplitConstraint> splits;
  LiftedProblem lp;
};

const Fixture& fixture(int index) {
  static std::map<int, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[index];
  if (slot) return *slot;
  slot = std::make_unique<Fixture>();
  Fixture& f = *slot;
  if (index < 4) {
    f.grid = load_grid(std::string(DCFLOW_DATA_DIR) + "/matpower/" + kCases[index] + ".m");
  } else {
    FeederSpec spec;
    spec.num_buses = 1000;
    f.grid = radial_feeder(spec);
  }
  f.y = build_admittance(f.grid);
  PerturbSpec spec;
  spec.magnitude = 0.02;
  const OperatingPoint op = perturb(solve_power_flow(f.grid).point, f.grid, spec).point;
  f.qp = assemble_qclp(f.grid, f.y, op);
  f.splits = split_all(f.qp, f.y);
  f.lp = linearize(f.qp, f.splits, f.qp.x0, 1.0);
  return f;
}

void set_size(benchmark::State& state, const Fixture& f) {
  state.counters["M+L"] = f.grid.num_buses() + f.grid.num_branches();
}

void BM_DualValueGrad(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  const Vector lambda(f.lp.num_rows, 0.5);
  Vector grad(f.lp.num_rows);
  for (auto _ : state) benchmark::DoNotOptimize(dual_value_grad(lambda, f.lp, grad));
  set_size(state, f);
}

void BM_InnerIterations(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  InnerOptions opts;
  opts.max_iters = 50;
  opts.tol = -1.0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_inner(f.lp, {}, opts));
  state.counters["per_iter"] =
      benchmark::Counter(50.0 * state.iterations(), benchmark::Counter::kIsRate |
                                                       benchmark::Counter::kInvert);
  set_size(state, f);
}

void BM_Linearize(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(linearize(f.qp, f.splits, f.qp.x0, 1.0));
  set_size(state, f);
}

void BM_SplitAll(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(split_all(f.qp, f.y));
  set_size(state, f);
}

void BM_Assemble(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  const OperatingPoint op = solve_power_flow(f.grid).point;
  for (auto _ : state) benchmark::DoNotOptimize(assemble_qclp(f.grid, f.y, op));
  set_size(state, f);
}

BENCHMARK(BM_DualValueGrad)->DenseRange(0, 4);
BENCHMARK(BM_InnerIterations)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Linearize)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SplitAll)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Assemble)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
