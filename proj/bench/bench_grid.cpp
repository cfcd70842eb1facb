// OpenMP grid driver versus the serial reference.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "fairplay/montecarlo.hpp"

namespace {

fairplay::mc::GridConfig config(int tournaments) {
  fairplay::mc::GridConfig cfg;
  cfg.tournaments = tournaments;
  return cfg;
}

void BM_GridSerial(benchmark::State& state) {
  const auto cfg = config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fairplay::mc::run_grid_serial(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 18);
}

void BM_GridParallel(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(1)));
  const auto cfg = config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fairplay::mc::run_grid(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 18);
  state.counters["threads"] = static_cast<double>(state.range(1));
}

}  // namespace

BENCHMARK(BM_GridSerial)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridParallel)
    ->ArgsProduct({{1000}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
