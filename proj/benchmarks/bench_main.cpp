#include <benchmark/benchmark.h>

#include <sstream>

#include "dhplan/milp.hpp"
#include "dhplan/mps.hpp"
#include "dhplan/solver.hpp"
#include "dhplan/synthetic.hpp"

using namespace dhplan;

namespace {

std::pair<MultiEnergySystem, Scenario> instance(int regions, int units,
                                                int invest, int steps) {
  return generate_synthetic_instance(
      {regions, units, invest, steps, 20250810});
}

void BM_Assemble(benchmark::State& state) {
  auto [sys, scn] = instance(2, 2, 2, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    MilpModel m = assemble(sys, scn);
    benchmark::DoNotOptimize(m.num_nonzeros());
  }
}
BENCHMARK(BM_Assemble)->Arg(24)->Arg(96)->Arg(168);

void BM_SolveLpRelaxation(benchmark::State& state) {
  auto [sys, scn] = instance(2, 2, 2, static_cast<int>(state.range(0)));
  MilpModel m = assemble(sys, scn);
  SolveConfig cfg;
  for (auto _ : state) {
    SolveResult r = solve_lp(m, {}, cfg);
    benchmark::DoNotOptimize(r.objective_value);
  }
}
BENCHMARK(BM_SolveLpRelaxation)->Arg(24)->Arg(96)->Unit(benchmark::kMillisecond);

void BM_BranchAndBound(benchmark::State& state) {
  auto [sys, scn] = instance(1, 2, 1, static_cast<int>(state.range(0)));
  MilpModel m = assemble(sys, scn);
  SolveConfig cfg;
  cfg.rel_gap = 0.005;
  for (auto _ : state) {
    SolveResult r = branch_and_bound(m, {}, cfg);
    benchmark::DoNotOptimize(r.objective_value);
  }
}
BENCHMARK(BM_BranchAndBound)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_MpsRoundTrip(benchmark::State& state) {
  auto [sys, scn] = instance(2, 2, 2, 48);
  MilpModel m = assemble(sys, scn);
  for (auto _ : state) {
    std::ostringstream os;
    write_mps_stream(m, os);
    std::istringstream is(os.str());
    MpsReadResult back = read_mps_stream(is);
    benchmark::DoNotOptimize(back.model.num_constraints());
  }
}
BENCHMARK(BM_MpsRoundTrip)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
