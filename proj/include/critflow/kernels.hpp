/// @file kernels.hpp
/// @brief Per-cell loops behind the grid and flow operators.
///
/// Every kernel exists twice: `serial` is the plain reference kept for
/// testing, `omp` is the OpenMP version the library calls. Per-cell maps
/// are bit-identical between the two. Reductions in `omp` accumulate one
/// partial per grid row and sum the rows in order, so their result does not
/// depend on the thread count.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace critflow::kernels {

struct Layout {
  int nx;
  int ny;
  int channels;
  double h;

  std::size_t cells() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
};

/// Frobenius magnitude of a contiguous block.
inline double block_norm(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * a[k];
  return std::sqrt(s);
}

/// Scalar factor g with Z = g * A for the regularized flux
/// |A|^{2p-2} A / (eps + |A|^p). Zero at r = 0.
inline double flux_factor(double r, double p, double eps) {
  if (r == 0.0) return 0.0;
  return std::pow(r, 2.0 * p - 2.0) / (eps + std::pow(r, p));
}

/// Convex potential r^p/p - (eps/p) log(eps + r^p) whose gradient in A is
/// the regularized flux. No constant offset is removed.
inline double smoothed_potential(double r, double p, double eps) {
  const double rp = std::pow(r, p);
  return rp / p - (eps / p) * std::log(eps + rp);
}

namespace serial {

void gradient(const Layout& layout, std::span<const double> u, std::span<double> grad);
void divergence(const Layout& layout, std::span<const double> flux, std::span<double> div);
/// `p` holds one exponent per cell.
void regularized_flux(const Layout& layout, std::span<const double> grad, std::span<const double> p,
                      double eps, std::span<double> flux);
/// Sum over cells of smoothed_potential(|grad|, p, eps) * h^2.
double smoothed_energy(const Layout& layout, std::span<const double> grad, std::span<const double> p,
                       double eps);
double dot(std::span<const double> a, std::span<const double> b);

template <class CellFn>
double sum_cells(const Layout& layout, CellFn&& fn) {
  double total = 0.0;
  for (int j = 0; j < layout.ny; ++j)
    for (int i = 0; i < layout.nx; ++i)
      total += fn(static_cast<std::size_t>(j) * static_cast<std::size_t>(layout.nx) + static_cast<std::size_t>(i));
  return total;
}

}  // namespace serial

namespace omp {

void gradient(const Layout& layout, std::span<const double> u, std::span<double> grad);
void divergence(const Layout& layout, std::span<const double> flux, std::span<double> div);
void regularized_flux(const Layout& layout, std::span<const double> grad, std::span<const double> p,
                      double eps, std::span<double> flux);
double smoothed_energy(const Layout& layout, std::span<const double> grad, std::span<const double> p,
                       double eps);
double dot(std::span<const double> a, std::span<const double> b);

/// Deterministic parallel sum of fn(cell_index) over all cells.
template <class CellFn>
double sum_cells(const Layout& layout, CellFn&& fn) {
  std::vector<double> rows(static_cast<std::size_t>(layout.ny), 0.0);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < layout.ny; ++j) {
    double acc = 0.0;
    const std::size_t base = static_cast<std::size_t>(j) * static_cast<std::size_t>(layout.nx);
    for (int i = 0; i < layout.nx; ++i) acc += fn(base + static_cast<std::size_t>(i));
    rows[static_cast<std::size_t>(j)] = acc;
  }
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

/// Parallel per-cell map fn(cell_index) with no reduction.
template <class CellFn>
void for_cells(const Layout& layout, CellFn&& fn) {
  const auto n = static_cast<std::ptrdiff_t>(layout.cells());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < n; ++idx) fn(static_cast<std::size_t>(idx));
}

}  // namespace omp

}  // namespace critflow::kernels
