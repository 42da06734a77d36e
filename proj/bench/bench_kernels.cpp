// Serial reference vs OpenMP kernels: dense products used by training, dataset
// generation and the Monte Carlo sweep. Thread count comes from OMP_NUM_THREADS.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "sparsedoa/harness.hpp"
#include "sparsedoa/kernels.hpp"

using namespace sdoa;
using kernels::Matrix;

namespace {

Matrix filled(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (auto& x : m.data) x = rng.uniform(-1.0, 1.0);
  return m;
}

template <void (*Gemm)(const Matrix&, const Matrix&, Matrix&)>
void BM_gemm_nn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto A = filled(256, n, 1), B = filled(n, n, 2);
  Matrix C;
  for (auto _ : state) {
    Gemm(A, B, C);
    benchmark::DoNotOptimize(C.data.data());
  }
  state.counters["GFLOP/s"] = benchmark::Counter(2.0 * 256 * n * n, benchmark::Counter::kIsIterationInvariantRate,
                                                 benchmark::Counter::kIs1000);
}

template <void (*Gemm)(const Matrix&, const Matrix&, Matrix&)>
void BM_gemm_tn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto A = filled(256, n, 3), B = filled(256, n, 4);
  Matrix C;
  for (auto _ : state) {
    Gemm(A, B, C);
    benchmark::DoNotOptimize(C.data.data());
  }
  state.counters["GFLOP/s"] = benchmark::Counter(2.0 * 256 * n * n, benchmark::Counter::kIsIterationInvariantRate,
                                                 benchmark::Counter::kIs1000);
}

void BM_dataset(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  DatasetSpec spec;
  spec.positions = mra_lookup(5).positions();
  spec.samples = 500;
  for (auto _ : state) benchmark::DoNotOptimize(generate_dataset(spec).inputs.data());
}

void BM_sweep(benchmark::State& state) {
  auto c = preset("desk");
  c.trials = 40;
  c.methods = {Method::None, Method::Failed};
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(c, {}, threads).rows.data());
}

}  // namespace

BENCHMARK(BM_gemm_nn<kernels::serial::gemm_nn>)->Name("gemm_nn/serial")->Arg(200)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gemm_nn<kernels::parallel::gemm_nn>)->Name("gemm_nn/parallel")->Arg(200)->Arg(1024)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_gemm_tn<kernels::serial::gemm_tn>)->Name("gemm_tn/serial")->Arg(200)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gemm_tn<kernels::parallel::gemm_tn>)->Name("gemm_tn/parallel")->Arg(200)->Arg(1024)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_dataset)->Name("dataset/threads")->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_sweep)->Name("sweep/threads")->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
