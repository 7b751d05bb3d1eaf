/// @file grid.hpp
/// @brief Cell-centred fields on a uniform rectangle and the Neumann
///        gradient / divergence pair.
///
/// Storage is row-major over cells (index j * nx + i, i along x) with the
/// per-cell components contiguous: N channel values for a VectorField and
/// N x 2 entries (channel-major, column d = spatial direction) for a
/// MatrixField.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace critflow {

/// Rejected input: shape mismatches, out-of-range parameters, malformed files.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kSpatialDims = 2;

struct Grid2D {
  int nx = 2;
  int ny = 2;
  double h = 1.0;

  Grid2D() = default;
  Grid2D(int nx, int ny, double h);

  std::size_t cells() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  double cell_area() const { return h * h; }
  double area() const { return cell_area() * static_cast<double>(cells()); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
  }

  bool operator==(const Grid2D&) const = default;
};

/// Per-cell block of `channels * Cols` doubles. Cols = 1 is an R^N field,
/// Cols = 2 an R^{N x 2} Jacobian / flux field.
template <int Cols>
class GridField {
 public:
  static constexpr int kCols = Cols;

  GridField() = default;
  GridField(const Grid2D& grid, int channels, double fill = 0.0);
  GridField(const Grid2D& grid, int channels, std::vector<double> values);

  const Grid2D& grid() const { return grid_; }
  int channels() const { return channels_; }
  std::size_t cell_stride() const { return static_cast<std::size_t>(channels_) * Cols; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::span<double> cell(std::size_t idx) { return {values_.data() + idx * cell_stride(), cell_stride()}; }
  std::span<const double> cell(std::size_t idx) const {
    return {values_.data() + idx * cell_stride(), cell_stride()};
  }

  double& operator()(int i, int j, int c) requires(Cols == 1) {
    return values_[grid_.index(i, j) * cell_stride() + static_cast<std::size_t>(c)];
  }
  double operator()(int i, int j, int c) const requires(Cols == 1) {
    return values_[grid_.index(i, j) * cell_stride() + static_cast<std::size_t>(c)];
  }
  double& operator()(int i, int j, int c, int d) requires(Cols == 2) {
    return values_[grid_.index(i, j) * cell_stride() + static_cast<std::size_t>(c * Cols + d)];
  }
  double operator()(int i, int j, int c, int d) const requires(Cols == 2) {
    return values_[grid_.index(i, j) * cell_stride() + static_cast<std::size_t>(c * Cols + d)];
  }

  /// Euclidean (Cols = 1) or Frobenius (Cols = 2) magnitude of one cell.
  double magnitude(std::size_t idx) const;

  bool same_shape(const GridField& other) const {
    return grid_ == other.grid_ && channels_ == other.channels_;
  }
  bool all_finite() const;

  GridField& operator+=(const GridField& rhs);
  GridField& operator-=(const GridField& rhs);
  GridField& operator*=(double s);
  /// this += s * x
  GridField& axpy(double s, const GridField& x);

  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(double s, GridField a) { return a *= s; }

  bool operator==(const GridField&) const = default;

 private:
  Grid2D grid_;
  int channels_ = 1;
  std::vector<double> values_;
};

using VectorField = GridField<1>;
using MatrixField = GridField<2>;

extern template class GridField<1>;
extern template class GridField<2>;

/// Boolean per cell. Used for the critical set Y and for the regions U
/// that the weak-solution inequality is tested on.
class CellMask {
 public:
  CellMask() = default;
  explicit CellMask(const Grid2D& grid, bool fill = false);

  static CellMask full(const Grid2D& grid) { return CellMask(grid, true); }
  static CellMask empty(const Grid2D& grid) { return CellMask(grid, false); }

  const Grid2D& grid() const { return grid_; }
  bool operator[](std::size_t idx) const { return cells_[idx] != 0; }
  bool at(int i, int j) const { return cells_[grid_.index(i, j)] != 0; }
  void set(std::size_t idx, bool v) { cells_[idx] = v ? 1 : 0; }
  void set(int i, int j, bool v) { set(grid_.index(i, j), v); }

  std::size_t count() const;
  bool any() const { return count() > 0; }
  /// True when every cell set in `other` is also set here.
  bool contains(const CellMask& other) const;
  CellMask complement() const;
  /// Chebyshev-distance dilation by `radius` cells.
  CellMask dilated(int radius) const;

  bool operator==(const CellMask&) const = default;

 private:
  Grid2D grid_;
  std::vector<std::uint8_t> cells_;
};

using CriticalMask = CellMask;

/// h^2-weighted inner product; Frobenius dot per cell for matrix fields.
template <int Cols>
double inner(const GridField<Cols>& a, const GridField<Cols>& b);

template <int Cols>
double norm(const GridField<Cols>& a);

/// Forward differences, zero across the far boundary (replicated ghost).
MatrixField gradient(const VectorField& u);

/// Backward differences with zero flux through the boundary; the exact
/// negative adjoint of gradient() under inner().
VectorField divergence(const MatrixField& a);

/// divergence(gradient(u)): the 5-point Neumann Laplacian.
VectorField laplacian(const VectorField& u);

/// Per-channel mean over the domain.
std::vector<double> channel_means(const VectorField& u);

/// Separable truncated Gaussian (radius ceil(3 sigma), sigma in cells) with
/// replicated boundary. sigma = 0 returns the input.
VectorField gaussian_blur(const VectorField& u, double sigma);

}  // namespace critflow
