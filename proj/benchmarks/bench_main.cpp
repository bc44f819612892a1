#include <benchmark/benchmark.h>

#include <cmath>

#include "denjoy/construction.hpp"
#include "denjoy/rotation.hpp"

using namespace denjoy;

namespace {

const StageState& stage0() {
  static StageState S = [] {
    ConstructionParams P;
    P.enclosure_iters = 20000;
    return init_stage0(P);
  }();
  return S;
}

void BM_eval_lift(benchmark::State& state) {
  const auto& M = stage0().M;
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(M.eval(x));
    x += 0.37;
    if (x > 8.0) x -= 8.0;
  }
}
BENCHMARK(BM_eval_lift);

void BM_derivative_order4(benchmark::State& state) {
  const auto& M = stage0().M;
  double x = 0.91;
  for (auto _ : state) {
    benchmark::DoNotOptimize(M.derivative_at(4, x));
    x += 1e-4;
    if (x > 0.99) x = 0.91;
  }
}
BENCHMARK(BM_derivative_order4);

void BM_rotation_enclosure(benchmark::State& state) {
  const auto& M = stage0().M;
  for (auto _ : state)
    benchmark::DoNotOptimize(rotation_enclosure(M, state.range(0), 0.0).mid());
}
BENCHMARK(BM_rotation_enclosure)->Arg(10000)->Arg(100000);

void BM_iterate_interval(benchmark::State& state) {
  const auto& S = stage0();
  for (auto _ : state)
    benchmark::DoNotOptimize(S.M.iterate_interval(S.I, 32).back().length);
}
BENCHMARK(BM_iterate_interval);

void BM_cj_distance(benchmark::State& state) {
  const auto& S = stage0();
  auto shifted = S.M.translated(1e-6);
  for (auto _ : state)
    benchmark::DoNotOptimize(cj_distance(S.M, shifted, 2).value);
}
BENCHMARK(BM_cj_distance);

}  // namespace

BENCHMARK_MAIN();
