#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "maslov/oracle.hpp"
#include "maslov/quadrature.hpp"
#include "maslov/sampling.hpp"

using namespace maslov;

namespace {

SumMode mode_of(const benchmark::State& state) { return state.range(0) == 0 ? SumMode::Serial : SumMode::Parallel; }

void BM_SumTerms(benchmark::State& state) {
  const SumMode mode = mode_of(state);
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto term = [](std::size_t i) {
    const double x = 1e-4 * static_cast<double>(i);
    return std::exp(cplx(-x * x, 3.0 * x));
  };
  for (auto _ : state) benchmark::DoNotOptimize(sum_terms(n, term, mode));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * n));
  state.SetLabel(mode == SumMode::Serial ? "serial" : "parallel");
}
BENCHMARK(BM_SumTerms)->ArgsProduct({{0, 1}, {1 << 12, 1 << 18}})->Unit(benchmark::kMicrosecond);

/// One constrained inner product by quadrature, n = 3, k = 2.
void BM_OracleInnerProduct(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const ConstraintPlane L(3, sampling::random_isotropic(rng, 3, state.range(1), 0.15));
  const QuasiGaussianState f = sampling::random_quasi_gaussian(rng, 3, 1);
  const QuasiGaussianState g = sampling::random_quasi_gaussian(rng, 3, 2);
  GridSpec grid;
  grid.mode = mode_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(numeric_inner_product(f, g, L, grid));
  state.SetLabel(grid.mode == SumMode::Serial ? "serial" : "parallel");
}
BENCHMARK(BM_OracleInnerProduct)->ArgsProduct({{0, 1}, {1, 2}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
