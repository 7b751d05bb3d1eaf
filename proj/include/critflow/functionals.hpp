/// @file functionals.hpp
/// @brief Discrete variable-exponent calculus: modulars, Luxemburg norms,
///        vectorial total variation, the space-time variations VPV and
///        VPV^{p(.)}, and the energy Psi with its eps-smoothed version.
///
/// Space integrals weight every cell by h^2. Time integrals over a
/// Trajectory use the left-endpoint rule: slices 0..K-1, each weighted dt.

#pragma once

#include <optional>
#include <vector>

#include "critflow/exponent.hpp"
#include "critflow/grid.hpp"

namespace critflow {

struct EnergyBreakdown {
  double y_part = 0.0;      ///< contribution of the critical set (total-variation part)
  double off_y_part = 0.0;  ///< modular contribution off the critical set
  double total() const { return y_part + off_y_part; }
};

/// u(t_k) for k = 0..K on a uniform time grid; T = K * dt.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(double dt, std::vector<VectorField> slices);

  double dt() const { return dt_; }
  std::size_t steps() const { return slices_.empty() ? 0 : slices_.size() - 1; }
  double final_time() const { return dt_ * static_cast<double>(steps()); }
  double time(std::size_t k) const { return dt_ * static_cast<double>(k); }
  const VectorField& operator[](std::size_t k) const { return slices_[k]; }
  const VectorField& front() const { return slices_.front(); }
  const VectorField& back() const { return slices_.back(); }
  std::size_t size() const { return slices_.size(); }
  const Grid2D& grid() const { return slices_.front().grid(); }
  int channels() const { return slices_.front().channels(); }
  const std::vector<VectorField>& slices() const { return slices_; }

  void push_back(VectorField u);

 private:
  double dt_ = 1.0;
  std::vector<VectorField> slices_;
};

/// One spatial mask per trajectory slice. A single mask broadcasts.
class SpaceTimeMask {
 public:
  SpaceTimeMask() = default;
  explicit SpaceTimeMask(CellMask spatial) : masks_{std::move(spatial)} {}
  explicit SpaceTimeMask(std::vector<CellMask> per_slice) : masks_(std::move(per_slice)) {}

  const CellMask& at(std::size_t k) const { return masks_.size() == 1 ? masks_.front() : masks_[k]; }
  std::size_t size() const { return masks_.size(); }

 private:
  std::vector<CellMask> masks_;
};

/// Critical set of the schedule sampled at each trajectory time.
SpaceTimeMask critical_set(const ExponentSchedule& schedule, const Trajectory& traj);

/// Sum over (masked) cells of |v|^p * h^2.
double modular(const VectorField& v, const ExponentField& p, const CellMask* region = nullptr);
double modular(const MatrixField& v, const ExponentField& p, const CellMask* region = nullptr);
/// Space-time modular, left-endpoint rule in time.
double modular(const Trajectory& v, const ExponentSchedule& p, const SpaceTimeMask* region = nullptr);

inline constexpr double kDefaultLuxemburgTol = 1e-10;

/// inf{lambda > 0 : modular(v / lambda) <= 1} by bracketed bisection.
/// Zero for v = 0. Throws InvalidInput on non-finite input.
double luxemburg_norm(const VectorField& v, const ExponentField& p, double tol = kDefaultLuxemburgTol);
double luxemburg_norm(const MatrixField& v, const ExponentField& p, double tol = kDefaultLuxemburgTol);

/// Discrete isotropic vectorial TV: sum over (masked) cells of
/// |gradient(u)| * h^2.
double total_variation(const VectorField& u, const CellMask* region = nullptr);

/// Space-time total variation of the spatial Jacobian.
double vpv(const Trajectory& traj);

/// VPV^{p(.)} split into the Y part (|grad u| on Y) and the off-Y modular.
/// With `region`, only cells inside the region count.
EnergyBreakdown vpv_p(const Trajectory& traj, const ExponentSchedule& schedule,
                      const SpaceTimeMask* region = nullptr);

/// Psi(u) = TV(u)(Y) + sum off Y of |grad u|^p / p * h^2.
EnergyBreakdown psi_energy(const VectorField& u, const ExponentField& p);

/// Sum over all cells of [|grad u|^p / p - (eps/p) log(eps + |grad u|^p)] h^2.
/// The constant -(eps/p) log(eps) per cell is kept.
double psi_energy_smoothed(const VectorField& u, const ExponentField& p, double eps);

/// psi_energy_smoothed(u + d) - psi_energy_smoothed(u), evaluated cell by
/// cell without forming either energy, so the result stays accurate when
/// the change is far below the round-off of the energies themselves.
double psi_energy_smoothed_change(const VectorField& u, const VectorField& d, const ExponentField& p, double eps);

/// L^2_h gradient of psi_energy_smoothed: -divergence(regularized flux).
VectorField psi_energy_smoothed_gradient(const VectorField& u, const ExponentField& p, double eps);

}  // namespace critflow
