#include <benchmark/benchmark.h>

#include "mlsort/ams.hpp"
#include "mlsort/experiment.hpp"
#include "mlsort/fastsort.hpp"
#include "mlsort/rlm.hpp"

using namespace mlsort;

namespace {

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::Serial : Exec::Parallel;
}

std::vector<std::vector<Element>> input(int p, std::uint64_t n_per_pe) {
  return generate_input({}, p, n_per_pe, SeedSpec{1, "bench"});
}

void BM_AmsSort(benchmark::State& state) {
  const int p = static_cast<int>(state.range(1));
  const auto data = input(p, 10'000);
  AmsParams params;
  params.levels = 2;
  params.seed = SeedSpec{2, "bench"};
  for (auto _ : state) {
    Machine m(p, {}, exec_of(state));
    benchmark::DoNotOptimize(ams_sort(m, data, params));
  }
  state.SetItemsProcessed(state.iterations() * p * 10'000);
}

void BM_RlmSort(benchmark::State& state) {
  const int p = static_cast<int>(state.range(1));
  const auto data = input(p, 10'000);
  RlmOptions options;
  options.plan = make_level_plan(p, 2);
  options.seed = SeedSpec{2, "bench"};
  for (auto _ : state) {
    Machine m(p, {}, exec_of(state));
    benchmark::DoNotOptimize(rlm_sort(m, data, options));
  }
  state.SetItemsProcessed(state.iterations() * p * 10'000);
}

void BM_FastRankSort(benchmark::State& state) {
  const int p = static_cast<int>(state.range(1));
  auto data = input(p, 64);
  for (auto& v : data) std::sort(v.begin(), v.end());
  for (auto _ : state) {
    Machine m(p, {}, exec_of(state));
    benchmark::DoNotOptimize(fast_rank_sort(m, m.all(), data));
  }
  state.SetItemsProcessed(state.iterations() * p * 64);
}

// First argument: 0 serial, 1 OpenMP. Second: number of PEs.
void exec_args(benchmark::internal::Benchmark* b) {
  for (int exec : {0, 1}) {
    for (int p : {64, 256}) b->Args({exec, p});
  }
}

}  // namespace

BENCHMARK(BM_AmsSort)->Apply(exec_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RlmSort)->Apply(exec_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FastRankSort)->Apply(exec_args)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
