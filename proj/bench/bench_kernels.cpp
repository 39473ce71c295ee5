#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "rdch/kernels.hpp"

namespace {

struct Inputs {
  explicit Inputs(std::size_t n) : coeff(n), g(n), out(n), h(1.0 / static_cast<double>(n)) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = (static_cast<double>(i) + 0.5) * h;
      const double n_val = 0.5 + 0.3 * std::cos(3.0 * x);
      coeff[i] = n_val * (1.0 - n_val) * (1.0 - n_val);
      g[i] = std::sin(5.0 * x);
    }
  }
  std::vector<double> coeff, g, out;
  double h;
};

template <void (*Kernel)(std::span<const double>, std::span<const double>, double,
                         std::span<double>)>
void flux_divergence(benchmark::State& state) {
  Inputs in(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Kernel(in.coeff, in.g, in.h, in.out);
    benchmark::DoNotOptimize(in.out.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <void (*Kernel)(std::span<const double>, double, std::span<double>)>
void laplacian(benchmark::State& state) {
  Inputs in(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Kernel(in.g, in.h, in.out);
    benchmark::DoNotOptimize(in.out.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(flux_divergence<rdch::kernels::serial::flux_divergence>)
    ->Name("flux_divergence/serial")
    ->RangeMultiplier(4)
    ->Range(1 << 10, 1 << 20);
BENCHMARK(flux_divergence<rdch::kernels::parallel::flux_divergence>)
    ->Name("flux_divergence/parallel")
    ->RangeMultiplier(4)
    ->Range(1 << 10, 1 << 20);
BENCHMARK(laplacian<rdch::kernels::serial::laplacian>)
    ->Name("laplacian/serial")
    ->RangeMultiplier(4)
    ->Range(1 << 10, 1 << 20);
BENCHMARK(laplacian<rdch::kernels::parallel::laplacian>)
    ->Name("laplacian/parallel")
    ->RangeMultiplier(4)
    ->Range(1 << 10, 1 << 20);

BENCHMARK_MAIN();
