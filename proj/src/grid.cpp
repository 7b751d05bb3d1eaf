#include "critflow/grid.hpp"

#include <algorithm>
#include <cmath>

#include "critflow/kernels.hpp"

namespace critflow {

Grid2D::Grid2D(int nx_, int ny_, double h_) : nx(nx_), ny(ny_), h(h_) {
  if (nx < 2 || ny < 2) throw InvalidInput("grid needs at least 2x2 cells");
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidInput("grid spacing must be positive and finite");
}

namespace {

kernels::Layout layout_of(const Grid2D& g, int channels) { return {g.nx, g.ny, channels, g.h}; }

}  // namespace

template <int Cols>
GridField<Cols>::GridField(const Grid2D& grid, int channels, double fill)
    : grid_(grid), channels_(channels) {
  if (channels < 1) throw InvalidInput("field needs at least one channel");
  values_.assign(grid.cells() * cell_stride(), fill);
}

template <int Cols>
GridField<Cols>::GridField(const Grid2D& grid, int channels, std::vector<double> values)
    : grid_(grid), channels_(channels), values_(std::move(values)) {
  if (channels < 1) throw InvalidInput("field needs at least one channel");
  if (values_.size() != grid.cells() * cell_stride())
    throw InvalidInput("field value count does not match grid and channel count");
}

template <int Cols>
double GridField<Cols>::magnitude(std::size_t idx) const {
  return kernels::block_norm(values_.data() + idx * cell_stride(), cell_stride());
}

template <int Cols>
bool GridField<Cols>::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

template <int Cols>
GridField<Cols>& GridField<Cols>::operator+=(const GridField& rhs) {
  if (!same_shape(rhs)) throw InvalidInput("field shape mismatch in +=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += rhs.values_[k];
  return *this;
}

template <int Cols>
GridField<Cols>& GridField<Cols>::operator-=(const GridField& rhs) {
  if (!same_shape(rhs)) throw InvalidInput("field shape mismatch in -=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= rhs.values_[k];
  return *this;
}

template <int Cols>
GridField<Cols>& GridField<Cols>::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

template <int Cols>
GridField<Cols>& GridField<Cols>::axpy(double s, const GridField& x) {
  if (!same_shape(x)) throw InvalidInput("field shape mismatch in axpy");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * x.values_[k];
  return *this;
}

template class GridField<1>;
template class GridField<2>;

CellMask::CellMask(const Grid2D& grid, bool fill) : grid_(grid), cells_(grid.cells(), fill ? 1 : 0) {}

std::size_t CellMask::count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

bool CellMask::contains(const CellMask& other) const {
  if (!(grid_ == other.grid_)) throw InvalidInput("mask grid mismatch");
  for (std::size_t k = 0; k < cells_.size(); ++k)
    if (other.cells_[k] && !cells_[k]) return false;
  return true;
}

CellMask CellMask::complement() const {
  CellMask out(grid_);
  for (std::size_t k = 0; k < cells_.size(); ++k) out.cells_[k] = cells_[k] ? 0 : 1;
  return out;
}

CellMask CellMask::dilated(int radius) const {
  CellMask out(grid_);
  for (int j = 0; j < grid_.ny; ++j) {
    for (int i = 0; i < grid_.nx; ++i) {
      if (!at(i, j)) continue;
      for (int dj = -radius; dj <= radius; ++dj)
        for (int di = -radius; di <= radius; ++di) {
          const int ii = i + di, jj = j + dj;
          if (ii >= 0 && ii < grid_.nx && jj >= 0 && jj < grid_.ny) out.set(ii, jj, true);
        }
    }
  }
  return out;
}

template <int Cols>
double inner(const GridField<Cols>& a, const GridField<Cols>& b) {
  if (!a.same_shape(b)) throw InvalidInput("inner: field shape mismatch");
  return kernels::omp::dot(a.values(), b.values()) * a.grid().cell_area();
}

template <int Cols>
double norm(const GridField<Cols>& a) {
  return std::sqrt(inner(a, a));
}

template double inner<1>(const VectorField&, const VectorField&);
template double inner<2>(const MatrixField&, const MatrixField&);
template double norm<1>(const VectorField&);
template double norm<2>(const MatrixField&);

MatrixField gradient(const VectorField& u) {
  MatrixField out(u.grid(), u.channels());
  kernels::omp::gradient(layout_of(u.grid(), u.channels()), u.values(), out.values());
  return out;
}

VectorField divergence(const MatrixField& a) {
  VectorField out(a.grid(), a.channels());
  kernels::omp::divergence(layout_of(a.grid(), a.channels()), a.values(), out.values());
  return out;
}

VectorField laplacian(const VectorField& u) { return divergence(gradient(u)); }

std::vector<double> channel_means(const VectorField& u) {
  std::vector<double> means(static_cast<std::size_t>(u.channels()), 0.0);
  const auto nc = static_cast<std::size_t>(u.channels());
  for (std::size_t idx = 0; idx < u.grid().cells(); ++idx)
    for (std::size_t c = 0; c < nc; ++c) means[c] += u.values()[idx * nc + c];
  for (double& m : means) m /= static_cast<double>(u.grid().cells());
  return means;
}

VectorField gaussian_blur(const VectorField& u, double sigma) {
  if (sigma < 0.0 || !std::isfinite(sigma)) throw InvalidInput("gaussian_blur: sigma must be >= 0");
  if (sigma == 0.0) return u;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double wsum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    w[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * k * k / (sigma * sigma));
    wsum += w[static_cast<std::size_t>(k + radius)];
  }
  for (double& x : w) x /= wsum;

  const Grid2D& g = u.grid();
  const int nc = u.channels();
  VectorField tmp(g, nc), out(g, nc);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      for (int c = 0; c < nc; ++c) {
        double s = 0.0;
        for (int k = -radius; k <= radius; ++k)
          s += w[static_cast<std::size_t>(k + radius)] * u(std::clamp(i + k, 0, g.nx - 1), j, c);
        tmp(i, j, c) = s;
      }
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      for (int c = 0; c < nc; ++c) {
        double s = 0.0;
        for (int k = -radius; k <= radius; ++k)
          s += w[static_cast<std::size_t>(k + radius)] * tmp(i, std::clamp(j + k, 0, g.ny - 1), c);
        out(i, j, c) = s;
      }
  return out;
}

}  // namespace critflow
