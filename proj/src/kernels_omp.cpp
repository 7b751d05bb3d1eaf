#include "critflow/kernels.hpp"

#include <algorithm>

namespace critflow::kernels::omp {

void gradient(const Layout& L, std::span<const double> u, std::span<double> grad) {
  const std::size_t nc = static_cast<std::size_t>(L.channels);
  const double inv_h = 1.0 / L.h;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < L.ny; ++j) {
    for (int i = 0; i < L.nx; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * L.nx + i;
      const double* uc = u.data() + idx * nc;
      double* g = grad.data() + idx * nc * 2;
      for (std::size_t c = 0; c < nc; ++c) {
        g[2 * c] = (i + 1 < L.nx) ? (uc[nc + c] - uc[c]) * inv_h : 0.0;
        g[2 * c + 1] = (j + 1 < L.ny) ? (uc[static_cast<std::size_t>(L.nx) * nc + c] - uc[c]) * inv_h : 0.0;
      }
    }
  }
}

void divergence(const Layout& L, std::span<const double> a, std::span<double> div) {
  const std::size_t nc = static_cast<std::size_t>(L.channels);
  const std::size_t row = static_cast<std::size_t>(L.nx) * nc * 2;
  const double inv_h = 1.0 / L.h;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < L.ny; ++j) {
    for (int i = 0; i < L.nx; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * L.nx + i;
      const double* ac = a.data() + idx * nc * 2;
      for (std::size_t c = 0; c < nc; ++c) {
        const double ax = (i + 1 < L.nx) ? ac[2 * c] : 0.0;
        const double ax_w = (i > 0) ? (ac - 2 * nc)[2 * c] : 0.0;
        const double ay = (j + 1 < L.ny) ? ac[2 * c + 1] : 0.0;
        const double ay_s = (j > 0) ? (ac - row)[2 * c + 1] : 0.0;
        div[idx * nc + c] = (ax - ax_w) * inv_h + (ay - ay_s) * inv_h;
      }
    }
  }
}

void regularized_flux(const Layout& L, std::span<const double> grad, std::span<const double> p, double eps,
                      std::span<double> flux) {
  const std::size_t stride = static_cast<std::size_t>(L.channels) * 2;
  for_cells(L, [&](std::size_t idx) {
    const double* g = grad.data() + idx * stride;
    const double f = flux_factor(block_norm(g, stride), p[idx], eps);
    for (std::size_t k = 0; k < stride; ++k) flux[idx * stride + k] = f * g[k];
  });
}

double smoothed_energy(const Layout& L, std::span<const double> grad, std::span<const double> p, double eps) {
  const std::size_t stride = static_cast<std::size_t>(L.channels) * 2;
  const double total = sum_cells(L, [&](std::size_t idx) {
    return smoothed_potential(block_norm(grad.data() + idx * stride, stride), p[idx], eps);
  });
  return total * L.h * L.h;
}

double dot(std::span<const double> a, std::span<const double> b) {
  // fixed-size chunks keep the summation order independent of thread count
  constexpr std::size_t kChunk = 4096;
  const std::size_t n = a.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = std::min(n, lo + kChunk);
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += a[k] * b[k];
    partial[static_cast<std::size_t>(c)] = s;
  }
  double s = 0.0;
  for (double v : partial) s += v;
  return s;
}

}  // namespace critflow::kernels::omp
