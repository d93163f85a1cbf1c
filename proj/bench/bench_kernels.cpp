// OpenMP kernels against their serial references on one fixed instance.
#include "clptac/dp.hpp"
#include "clptac/io.hpp"
#include "clptac/sim.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace clptac;

const Instance& bench_instance() {
  static const Instance inst = [] {
    PeriodFreeInstance raw;
    raw.container = Container{{30, 24, 20}};
    const Dims kinds[] = {{12, 10, 9}, {9, 8, 10}, {15, 12, 7}};
    for (int id = 1; id <= 12; ++id) raw.boxes.push_back({id, kinds[id % 3], 0});
    return assign_random_availability(raw, TimeHorizon{8}, 17);
  }();
  return inst;
}

SolveConfig bench_config() {
  SolveConfig c;
  c.state_pack.time_budget = std::chrono::duration<double>(60.0);
  c.state_pack.node_limit = 20000;
  c.terminal_pack = c.state_pack;
  return c;
}

template <auto Solve>
void BM_solve(benchmark::State& state) {
  const auto& inst = bench_instance();
  const auto model = ReliabilityModel::constant(inst.horizon, Rational(7, 10));
  PackingCache cache;
  Solve(inst, model, bench_config(), &cache);  // packings warm; time the induction only
  for (auto _ : state) benchmark::DoNotOptimize(Solve(inst, model, bench_config(), &cache));
}

template <auto Solve>
void BM_solve_cold(benchmark::State& state) {
  const auto& inst = bench_instance();
  const auto model = ReliabilityModel::constant(inst.horizon, Rational(7, 10));
  for (auto _ : state) benchmark::DoNotOptimize(Solve(inst, model, bench_config(), nullptr));
}

template <auto Run>
void BM_monte_carlo(benchmark::State& state) {
  const auto& inst = bench_instance();
  const auto model = ReliabilityModel::constant(inst.horizon, Rational(7, 10));
  const auto policy = solve_value_functions(inst, model, bench_config());
  const auto reps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Run(inst, model, policy.value_table, reps, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_solve<solve_value_functions>)->Name("dp/parallel/warm")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_solve<solve_value_functions_serial>)->Name("dp/serial/warm")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_solve_cold<solve_value_functions>)->Name("dp/parallel/cold")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_solve_cold<solve_value_functions_serial>)->Name("dp/serial/cold")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_monte_carlo<run_monte_carlo>)->Name("mc/parallel")->Arg(5000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_monte_carlo<run_monte_carlo_serial>)->Name("mc/serial")->Arg(5000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
