// Serial reference vs OpenMP kernels on square RGB grids.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "critflow/kernels.hpp"

namespace k = critflow::kernels;

namespace {

struct Data {
  k::Layout layout;
  std::vector<double> u, grad, flux, div, p;

  explicit Data(int n) : layout{n, n, 3, 1.0 / n} {
    const std::size_t cells = layout.cells();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    u.resize(cells * 3);
    for (double& v : u) v = uni(rng);
    p.resize(cells);
    for (double& v : p) v = uni(rng) < 0.2 ? 1.0 : 1.1 + uni(rng);
    grad.resize(cells * 6);
    flux.resize(cells * 6);
    div.resize(cells * 3);
    k::serial::gradient(layout, u, grad);
    k::serial::regularized_flux(layout, grad, p, 1e-2, flux);
  }
};

#define CRITFLOW_BENCH_PAIR(name, ...)                        \
  template <int Omp>                                             \
  void name(benchmark::State& state) {                           \
    Data d(static_cast<int>(state.range(0)));                    \
    for (auto _ : state) {                                       \
      if constexpr (Omp) {                                       \
        namespace impl = k::omp;                                 \
        __VA_ARGS__;                                             \
      } else {                                                   \
        namespace impl = k::serial;                              \
        __VA_ARGS__;                                             \
      }                                                          \
    }                                                            \
    state.SetItemsProcessed(state.iterations() * d.layout.cells()); \
  }                                                              \
  BENCHMARK_TEMPLATE(name, 0)->Name(#name "/serial")->RangeMultiplier(4)->Range(64, 1024); \
  BENCHMARK_TEMPLATE(name, 1)->Name(#name "/omp")->RangeMultiplier(4)->Range(64, 1024);

CRITFLOW_BENCH_PAIR(gradient, impl::gradient(d.layout, d.u, d.grad); benchmark::ClobberMemory())
CRITFLOW_BENCH_PAIR(divergence, impl::divergence(d.layout, d.flux, d.div); benchmark::ClobberMemory())
CRITFLOW_BENCH_PAIR(regularized_flux, impl::regularized_flux(d.layout, d.grad, d.p, 1e-2, d.flux);
                    benchmark::ClobberMemory())
CRITFLOW_BENCH_PAIR(smoothed_energy, benchmark::DoNotOptimize(impl::smoothed_energy(d.layout, d.grad, d.p, 1e-2)))

}  // namespace

BENCHMARK_MAIN();
