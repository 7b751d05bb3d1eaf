#include "critflow/functionals.hpp"

#include <cmath>

#include "critflow/kernels.hpp"

namespace critflow {

namespace {

kernels::Layout layout_of(const Grid2D& g, int channels) { return {g.nx, g.ny, channels, g.h}; }

void check_grid(const Grid2D& a, const Grid2D& b, const char* what) {
  if (!(a == b)) throw InvalidInput(std::string(what) + ": grid mismatch");
}

template <int Cols>
double modular_impl(const GridField<Cols>& v, const ExponentField& p, const CellMask* region) {
  check_grid(v.grid(), p.grid(), "modular");
  if (region) check_grid(v.grid(), region->grid(), "modular region");
  const double s = kernels::omp::sum_cells(layout_of(v.grid(), v.channels()), [&](std::size_t idx) {
    if (region && !(*region)[idx]) return 0.0;
    return std::pow(v.magnitude(idx), p[idx]);
  });
  return s * v.grid().cell_area();
}

template <int Cols>
double luxemburg_impl(const GridField<Cols>& v, const ExponentField& p, double tol) {
  if (!(tol > 0.0)) throw InvalidInput("luxemburg_norm: tol must be positive");
  if (!v.all_finite()) throw InvalidInput("luxemburg_norm: non-finite input");
  check_grid(v.grid(), p.grid(), "luxemburg_norm");

  std::vector<double> mag(v.grid().cells());
  bool nonzero = false;
  for (std::size_t idx = 0; idx < mag.size(); ++idx) {
    mag[idx] = v.magnitude(idx);
    nonzero = nonzero || mag[idx] > 0.0;
  }
  if (!nonzero) return 0.0;

  const double area = v.grid().cell_area();
  const auto scaled_modular = [&](double lambda) {
    double s = 0.0;
    for (std::size_t idx = 0; idx < mag.size(); ++idx) s += std::pow(mag[idx] / lambda, p[idx]);
    return s * area;
  };

  // bracket [lo, hi] with modular(v/lo) > 1 >= modular(v/hi)
  double lo = 1.0, hi = 1.0;
  if (scaled_modular(1.0) > 1.0) {
    while (scaled_modular(hi) > 1.0) {
      lo = hi;
      hi *= 2.0;
    }
  } else {
    while (scaled_modular(lo) <= 1.0) {
      hi = lo;
      lo *= 0.5;
    }
  }
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (scaled_modular(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace

Trajectory::Trajectory(double dt, std::vector<VectorField> slices) : dt_(dt), slices_(std::move(slices)) {
  if (!(dt > 0.0)) throw InvalidInput("trajectory dt must be positive");
  for (const auto& s : slices_)
    if (!s.same_shape(slices_.front())) throw InvalidInput("trajectory slices must share grid and channels");
}

void Trajectory::push_back(VectorField u) {
  if (!slices_.empty() && !u.same_shape(slices_.front()))
    throw InvalidInput("trajectory slices must share grid and channels");
  slices_.push_back(std::move(u));
}

SpaceTimeMask critical_set(const ExponentSchedule& schedule, const Trajectory& traj) {
  if (schedule.time_independent()) return SpaceTimeMask(critical_mask(schedule.slice(0)));
  std::vector<CellMask> masks;
  masks.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) masks.push_back(critical_mask(schedule.at(traj.time(k))));
  return SpaceTimeMask(std::move(masks));
}

double modular(const VectorField& v, const ExponentField& p, const CellMask* region) {
  return modular_impl(v, p, region);
}

double modular(const MatrixField& v, const ExponentField& p, const CellMask* region) {
  return modular_impl(v, p, region);
}

double modular(const Trajectory& v, const ExponentSchedule& p, const SpaceTimeMask* region) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < v.size(); ++k)
    s += modular(v[k], p.at(v.time(k)), region ? &region->at(k) : nullptr);
  return s * v.dt();
}

double luxemburg_norm(const VectorField& v, const ExponentField& p, double tol) {
  return luxemburg_impl(v, p, tol);
}

double luxemburg_norm(const MatrixField& v, const ExponentField& p, double tol) {
  return luxemburg_impl(v, p, tol);
}

double total_variation(const VectorField& u, const CellMask* region) {
  if (region) check_grid(u.grid(), region->grid(), "total_variation");
  const MatrixField g = gradient(u);
  const double s = kernels::omp::sum_cells(layout_of(u.grid(), u.channels()), [&](std::size_t idx) {
    return (region && !(*region)[idx]) ? 0.0 : g.magnitude(idx);
  });
  return s * u.grid().cell_area();
}

double vpv(const Trajectory& traj) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) s += total_variation(traj[k]);
  return s * traj.dt();
}

EnergyBreakdown vpv_p(const Trajectory& traj, const ExponentSchedule& schedule, const SpaceTimeMask* region) {
  EnergyBreakdown out;
  if (traj.size() == 0) return out;
  check_grid(traj.grid(), schedule.grid(), "vpv_p");
  const auto layout = layout_of(traj.grid(), traj.channels());
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const ExponentField& p = schedule.at(traj.time(k));
    const MatrixField g = gradient(traj[k]);
    const CellMask* r = region ? &region->at(k) : nullptr;
    out.y_part += kernels::omp::sum_cells(layout, [&](std::size_t idx) {
      return (p[idx] == 1.0 && (!r || (*r)[idx])) ? g.magnitude(idx) : 0.0;
    });
    out.off_y_part += kernels::omp::sum_cells(layout, [&](std::size_t idx) {
      return (p[idx] != 1.0 && (!r || (*r)[idx])) ? std::pow(g.magnitude(idx), p[idx]) : 0.0;
    });
  }
  const double w = traj.grid().cell_area() * traj.dt();
  out.y_part *= w;
  out.off_y_part *= w;
  return out;
}

EnergyBreakdown psi_energy(const VectorField& u, const ExponentField& p) {
  check_grid(u.grid(), p.grid(), "psi_energy");
  const MatrixField g = gradient(u);
  const auto layout = layout_of(u.grid(), u.channels());
  EnergyBreakdown out;
  out.y_part = kernels::omp::sum_cells(layout, [&](std::size_t idx) {
    return p[idx] == 1.0 ? g.magnitude(idx) : 0.0;
  });
  out.off_y_part = kernels::omp::sum_cells(layout, [&](std::size_t idx) {
    return p[idx] != 1.0 ? std::pow(g.magnitude(idx), p[idx]) / p[idx] : 0.0;
  });
  out.y_part *= u.grid().cell_area();
  out.off_y_part *= u.grid().cell_area();
  return out;
}

double psi_energy_smoothed(const VectorField& u, const ExponentField& p, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("psi_energy_smoothed: eps must be positive");
  check_grid(u.grid(), p.grid(), "psi_energy_smoothed");
  const MatrixField g = gradient(u);
  return kernels::omp::smoothed_energy(layout_of(u.grid(), u.channels()), g.values(), p.values(), eps);
}

namespace {

// x - log1p(x) without cancellation for small x
double x_minus_log1p(double x) {
  if (std::abs(x) < 1e-3) {
    const double x2 = x * x;
    return x2 * (0.5 - x / 3.0 + x2 / 4.0 - x2 * x / 5.0);
  }
  return x - std::log1p(x);
}

}  // namespace

double psi_energy_smoothed_change(const VectorField& u, const VectorField& d, const ExponentField& p, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("psi_energy_smoothed_change: eps must be positive");
  if (!u.same_shape(d)) throw InvalidInput("psi_energy_smoothed_change: shape mismatch");
  check_grid(u.grid(), p.grid(), "psi_energy_smoothed_change");
  const MatrixField a = gradient(u);
  const MatrixField b = gradient(d);
  const std::size_t stride = a.cell_stride();
  const double s = kernels::omp::sum_cells(layout_of(u.grid(), u.channels()), [&](std::size_t idx) {
    const auto ac = a.cell(idx);
    const auto bc = b.cell(idx);
    double r0sq = 0.0, ds = 0.0;
    for (std::size_t q = 0; q < stride; ++q) {
      r0sq += ac[q] * ac[q];
      ds += bc[q] * (2.0 * ac[q] + bc[q]);  // |A+B|^2 - |A|^2
    }
    const double pe = p[idx];
    const double old_p = std::pow(r0sq, 0.5 * pe);
    // new^p - old^p
    const double dp = r0sq > 0.0 ? old_p * std::expm1(0.5 * pe * std::log1p(ds / r0sq))
                                 : std::pow(std::max(ds, 0.0), 0.5 * pe);
    const double x = dp / (eps + old_p);
    return (x * old_p + eps * x_minus_log1p(x)) / pe;
  });
  return s * u.grid().cell_area();
}

VectorField psi_energy_smoothed_gradient(const VectorField& u, const ExponentField& p, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("psi_energy_smoothed_gradient: eps must be positive");
  check_grid(u.grid(), p.grid(), "psi_energy_smoothed_gradient");
  MatrixField z = gradient(u);
  kernels::omp::regularized_flux(layout_of(u.grid(), u.channels()), z.values(), p.values(), eps, z.values());
  VectorField d = divergence(z);
  d *= -1.0;
  return d;
}

}  // namespace critflow
