// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to compare
// thread counts.

#include <benchmark/benchmark.h>

#include <vector>

#include "sdelap/kernels.hpp"
#include "sdelap/surrogate.hpp"

namespace {

using namespace sdelap;

const GbmParams kParams{0.5, 4.0, 0.5};

template <auto Kernel>
void BM_TerminalValues(benchmark::State& state) {
  const SeededRng rng(1, 0);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(kParams, 1.0, n, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_LaplacePaths(benchmark::State& state) {
  const SeededRng rng(2, 0);
  const auto grid = TimeGrid::linspace(0.0, 1.0, 2000);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(kParams, grid, {8.0, 4.0}, n, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct GradientFixture {
  SurrogateModel model;
  std::vector<PreparedExample> batch;

  explicit GradientFixture(std::size_t n) {
    TrainConfig cfg;
    SeededRng rng(3, 0);
    model = SurrogateModel::initialize(Architecture::from(cfg), rng);
    const auto grid = TimeGrid::equispaced(200, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const GbmParams p{rng.uniform(0.1, 1.0), rng.uniform(4.0, 8.0), rng.uniform(0.1, 1.0)};
      batch.push_back(prepare(model, make_forecast_example(sample_gbm_exact(p, grid, rng), 0.5)));
    }
  }
};

template <auto Kernel>
void BM_BatchGradient(benchmark::State& state) {
  const GradientFixture fx(static_cast<std::size_t>(state.range(0)));
  std::vector<double> g(fx.model.weight_count());
  for (auto _ : state) {
    benchmark::DoNotOptimize(Kernel(fx.model, fx.batch, g));
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_TerminalValues<kernels::serial::terminal_values>)->Name("terminal_values/serial")->Arg(100000);
BENCHMARK(BM_TerminalValues<kernels::parallel::terminal_values>)->Name("terminal_values/omp")->Arg(100000);
BENCHMARK(BM_LaplacePaths<kernels::serial::laplace_paths>)->Name("laplace_paths/serial")->Arg(200);
BENCHMARK(BM_LaplacePaths<kernels::parallel::laplace_paths>)->Name("laplace_paths/omp")->Arg(200);
BENCHMARK(BM_BatchGradient<kernels::serial::batch_gradient>)->Name("batch_gradient/serial")->Arg(32);
BENCHMARK(BM_BatchGradient<kernels::parallel::batch_gradient>)->Name("batch_gradient/omp")->Arg(32);

BENCHMARK_MAIN();
