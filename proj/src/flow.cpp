#include "critflow/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "critflow/kernels.hpp"

namespace critflow {

namespace {

constexpr double kSafety = 0.9;

kernels::Layout layout_of(const Grid2D& g, int channels) { return {g.nx, g.ny, channels, g.h}; }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Exponents at which to probe the flux: all distinct values, or 17
// quantiles of them (always including the extremes).
std::vector<double> probe_exponents(const ExponentSchedule& schedule) {
  std::set<double> distinct;
  for (std::size_t k = 0; k < schedule.size(); ++k)
    for (double p : schedule.slice(k).values()) distinct.insert(p);
  std::vector<double> all(distinct.begin(), distinct.end());
  constexpr std::size_t kMax = 17;
  if (all.size() <= kMax) return all;
  std::vector<double> picked;
  for (std::size_t q = 0; q < kMax; ++q) picked.push_back(all[q * (all.size() - 1) / (kMax - 1)]);
  return picked;
}

void require_valid(const FlowConfig& c) {
  if (c.u0.size() == 0) throw InvalidInput("flow: u0 is empty");
  if (!c.u0.all_finite()) throw InvalidInput("flow: u0 has non-finite values");
  if (c.schedule.size() == 0) throw InvalidInput("flow: exponent schedule is empty");
  if (!(c.schedule.grid() == c.u0.grid())) throw InvalidInput("flow: schedule grid differs from u0 grid");
  if (!(c.eps > 0.0)) throw InvalidInput("flow: eps must be positive");
  if (!(c.delta >= 0.0)) throw InvalidInput("flow: delta must be >= 0");
  if (!(c.T >= 0.0) || !std::isfinite(c.T)) throw InvalidInput("flow: T must be finite and >= 0");
  if (c.dt && !(*c.dt > 0.0)) throw InvalidInput("flow: dt must be positive");
  if (c.trace_every == 0 || c.trajectory_stride == 0) throw InvalidInput("flow: intervals must be >= 1");
  if (c.fidelity.kind == FidelitySpec::Kind::linear_tether) {
    if (!(c.fidelity.lambda >= 0.0)) throw InvalidInput("flow: tether lambda must be >= 0");
    if (!c.fidelity.target.same_shape(c.u0)) throw InvalidInput("flow: tether target shape differs from u0");
  }
}

}  // namespace

VectorField FidelitySpec::evaluate(const VectorField& u) const {
  if (!active()) return VectorField(u.grid(), u.channels());
  VectorField f = target - u;
  f *= lambda;
  return f;
}

std::vector<double> regularized_flux(std::span<const double> a, double p, double eps) {
  const double g = kernels::flux_factor(kernels::block_norm(a.data(), a.size()), p, eps);
  std::vector<double> z(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) z[k] = g * a[k];
  return z;
}

double monotonicity_gap(std::span<const double> xi, std::span<const double> eta, double p, double eps) {
  if (xi.size() != eta.size()) throw InvalidInput("monotonicity_gap: size mismatch");
  const auto zx = regularized_flux(xi, p, eps);
  const auto ze = regularized_flux(eta, p, eps);
  double s = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) s += (zx[k] - ze[k]) * (xi[k] - eta[k]);
  return s;
}

MatrixField flux_field(const MatrixField& grad, const ExponentField& p, double eps) {
  if (!(grad.grid() == p.grid())) throw InvalidInput("flux_field: grid mismatch");
  MatrixField z(grad.grid(), grad.channels());
  kernels::omp::regularized_flux(layout_of(grad.grid(), grad.channels()), grad.values(), p.values(), eps,
                                 z.values());
  return z;
}

VectorField rhs(const VectorField& u, const ExponentField& p_slice, double eps, double delta,
                const FidelitySpec& fidelity, double /*t*/) {
  const MatrixField g = gradient(u);
  VectorField out = divergence(flux_field(g, p_slice, eps));
  if (fidelity.active()) out += fidelity.evaluate(u);
  if (delta > 0.0) out.axpy(delta, divergence(g));
  return out;
}

double flux_lipschitz_estimate(const ExponentSchedule& schedule, double eps, double probe_radius,
                               std::size_t probes) {
  if (!(eps > 0.0) || !(probe_radius > 0.0) || probes == 0)
    throw InvalidInput("flux_lipschitz_estimate: eps, radius and probe count must be positive");
  const std::vector<double> exps = probe_exponents(schedule);
  const std::size_t per_exp = std::max<std::size_t>(1, probes / exps.size());

  constexpr std::size_t kDim = 6;  // one RGB Jacobian; Z is radial so the size does not matter
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal;
  const auto random_unit = [&] {
    std::array<double, kDim> v{};
    for (double& x : v) x = normal(rng);
    const double n = kernels::block_norm(v.data(), kDim);
    for (double& x : v) x /= n;
    return v;
  };

  const double r_min = probe_radius * 1e-9;
  double lip = 0.0;
  for (double p : exps) {
    for (std::size_t k = 0; k < per_exp; ++k) {
      const double frac = per_exp == 1 ? 1.0 : static_cast<double>(k) / static_cast<double>(per_exp - 1);
      const double r = (k == 0) ? 0.0 : r_min * std::pow(probe_radius / r_min, frac);
      const auto dir_a = random_unit();
      std::array<double, kDim> base{};
      for (std::size_t q = 0; q < kDim; ++q) base[q] = r * dir_a[q];
      const auto z0 = regularized_flux(base, p, eps);
      const double step = std::max(r, r_min) * 1e-6;
      // radial direction and one random direction
      for (int which = 0; which < 2; ++which) {
        const auto dir = which == 0 ? dir_a : random_unit();
        std::array<double, kDim> moved{};
        for (std::size_t q = 0; q < kDim; ++q) moved[q] = base[q] + step * dir[q];
        const auto z1 = regularized_flux(moved, p, eps);
        double d = 0.0;
        for (std::size_t q = 0; q < kDim; ++q) d += (z1[q] - z0[q]) * (z1[q] - z0[q]);
        lip = std::max(lip, std::sqrt(d) / step);
      }
    }
  }
  return lip;
}

double stability_dt(const ExponentSchedule& schedule, double eps, double delta, const Grid2D& grid,
                    double probe_radius, double lambda) {
  if (!(delta >= 0.0) || !(lambda >= 0.0)) throw InvalidInput("stability_dt: delta and lambda must be >= 0");
  const double lip = flux_lipschitz_estimate(schedule, eps, probe_radius);
  return kSafety / (2.0 * kSpatialDims * (lip + delta) / grid.cell_area() + lambda);
}

double default_probe_radius(const VectorField& u0) {
  const MatrixField g = gradient(u0);
  double m = 0.0;
  for (std::size_t idx = 0; idx < g.grid().cells(); ++idx) m = std::max(m, g.magnitude(idx));
  return std::max(1.0, 2.0 * m);
}

FlowResult run_flow(const FlowConfig& config) {
  require_valid(config);
  FlowResult result;
  result.config = config;

  const double lambda = config.fidelity.active() ? config.fidelity.lambda : 0.0;
  const double dt_max = config.dt ? *config.dt
                                  : stability_dt(config.schedule, config.eps, config.delta, config.u0.grid(),
                                                 default_probe_radius(config.u0), lambda);
  const std::size_t steps =
      config.T == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(config.T / dt_max - 1e-9));
  const double dt = steps == 0 ? dt_max : config.T / static_cast<double>(steps);
  result.diagnostics.dt = dt;
  result.diagnostics.steps = steps;

  const auto layout = layout_of(config.u0.grid(), config.u0.channels());
  const std::vector<double> means0 = channel_means(config.u0);
  std::vector<VectorField> kept;
  VectorField u = config.u0;

  for (std::size_t k = 0;; ++k) {
    const double t = dt * static_cast<double>(k);
    const ExponentField& p = config.schedule.at(t);
    const MatrixField g = gradient(u);
    const MatrixField z = flux_field(g, p, config.eps);

    EnergyRecord rec;
    rec.step = k;
    rec.time = t;
    rec.psi = psi_energy(u, p);
    rec.smoothed = kernels::omp::smoothed_energy(layout, g.values(), p.values(), config.eps);
    rec.frozen_next = std::numeric_limits<double>::quiet_NaN();

    if (k % config.trace_every == 0) result.flux_trace.push_back({k, t, g, z});
    if (k % config.trajectory_stride == 0) kept.push_back(u);

    if (k == steps) {
      result.energy_trace.push_back(rec);
      break;
    }

    VectorField r = divergence(z);
    if (config.fidelity.active()) r += config.fidelity.evaluate(u);
    if (config.delta > 0.0) r.axpy(config.delta, divergence(g));

    const std::vector<double> before = channel_means(u);
    u.axpy(dt, r);
    if (!u.all_finite())
      throw FlowDiverged(k + 1, "flow: non-finite state at step " + std::to_string(k + 1) +
                                    " (dt " + std::to_string(dt) + " too large?)");

    rec.frozen_next = psi_energy_smoothed(u, p, config.eps);
    result.energy_trace.push_back(rec);

    const std::vector<double> after = channel_means(u);
    for (std::size_t c = 0; c < after.size(); ++c) {
      result.diagnostics.max_step_mean_drift =
          std::max(result.diagnostics.max_step_mean_drift, std::abs(after[c] - before[c]));
      result.diagnostics.cumulative_mean_drift =
          std::max(result.diagnostics.cumulative_mean_drift, std::abs(after[c] - means0[c]));
    }
  }

  result.trajectory = Trajectory(dt * static_cast<double>(config.trajectory_stride), std::move(kept));
  result.final_state = std::move(u);
  return result;
}

WeakResidual weak_residual(const FlowResult& result, const Trajectory& w, const SpaceTimeMask& region,
                           const ExponentSchedule& schedule, double t_star, const WeakResidualOptions& options) {
  const Trajectory& u = result.trajectory;
  const FlowConfig& cfg = result.config;
  if (cfg.trajectory_stride != 1 || u.size() != result.diagnostics.steps + 1)
    throw InvalidInput("weak_residual: needs the trajectory stored at every step");
  if (std::abs(w.dt() - u.dt()) > 1e-12 * u.dt()) throw InvalidInput("weak_residual: test trajectory dt differs");
  if (!w.front().same_shape(u.front())) throw InvalidInput("weak_residual: test trajectory shape differs");
  if (!(t_star >= 0.0)) throw InvalidInput("weak_residual: t_star must be >= 0");

  const std::size_t kstar =
      std::min(u.steps(), static_cast<std::size_t>(std::llround(t_star / u.dt())));
  if (w.size() < kstar + 1) throw InvalidInput("weak_residual: test trajectory too short");
  for (std::size_t k = 0; k <= kstar; ++k)
    if (!region.at(k).contains(critical_mask(schedule.at(u.time(k)))))
      throw InvalidInput("weak_residual: region does not contain the critical set at step " + std::to_string(k));

  const double dt = u.dt();
  const double area = u.grid().cell_area();
  const double eps = cfg.eps;
  const std::size_t stride = static_cast<std::size_t>(u.channels()) * 2;

  WeakResidual out;
  out.steps = kstar;

  double lhs_dtw = 0.0, lhs_vpv = 0.0;
  double rhs_z = 0.0, rhs_mono = 0.0, rhs_fid = 0.0, rhs_eps = 0.0, rhs_delta = 0.0;
  for (std::size_t k = 0; k < kstar; ++k) {
    const ExponentField& p = schedule.at(u.time(k));
    const CellMask& U = region.at(k);
    const MatrixField gu = gradient(u[k]);
    const MatrixField gw = gradient(w[k]);
    const MatrixField zu = flux_field(gu, p, eps);

    const VectorField dw = w[k + 1] - w[k];
    lhs_dtw += inner(dw, u[k]);

    const VectorField da = (u[k + 1] - u[k]) - dw;
    out.time_defect += inner(da, da) - inner(dw, dw);

    double vpv_k = 0.0, z_k = 0.0, mono_k = 0.0;
    for (std::size_t idx = 0; idx < u.grid().cells(); ++idx) {
      const auto a = gu.cell(idx);
      const auto b = gw.cell(idx);
      if (U[idx]) {
        const double r = gu.magnitude(idx);
        vpv_k += p[idx] == 1.0 ? r : std::pow(r, p[idx]);
        z_k += dot(zu.cell(idx), b);
      } else {
        const double rw = gw.magnitude(idx);
        double m = 0.0;
        if (rw > 0.0)
          m = options.limit_form ? std::pow(rw, p[idx] - 2.0) : kernels::flux_factor(rw, p[idx], eps);
        double s = 0.0;
        for (std::size_t q = 0; q < stride; ++q) s += m * b[q] * (b[q] - a[q]);
        mono_k += s;
      }
    }
    lhs_vpv += vpv_k * area;
    rhs_z += z_k * area;
    rhs_mono += mono_k * area;

    if (cfg.fidelity.active()) rhs_fid += inner(cfg.fidelity.evaluate(u[k]), u[k] - w[k]);
    rhs_eps += static_cast<double>(U.count()) * area;
    if (cfg.delta > 0.0) rhs_delta += inner(gw, gw);
  }

  const VectorField end_gap = u[kstar] - w[kstar];
  const VectorField start_gap = u[0] - w[0];
  out.lhs = inner(end_gap, end_gap) + 2.0 * lhs_dtw + 2.0 * dt * lhs_vpv;
  out.rhs = inner(start_gap, start_gap) + inner(w[kstar], w[kstar]) - inner(w[0], w[0]) + 2.0 * dt * rhs_z +
            2.0 * dt * rhs_mono + 2.0 * dt * rhs_fid;
  if (!options.limit_form) out.rhs += 2.0 * eps * dt * rhs_eps + cfg.delta * dt * rhs_delta;
  return out;
}

FluxReport flux_constraints(const MatrixField& grad, const MatrixField& flux, const ExponentField& p, double eps) {
  if (!grad.same_shape(flux) || !(grad.grid() == p.grid())) throw InvalidInput("flux_constraints: shape mismatch");
  FluxReport rep;
  rep.samples = 1;
  const std::size_t stride = grad.cell_stride();
  for (std::size_t idx = 0; idx < grad.grid().cells(); ++idx) {
    const double r = grad.magnitude(idx);
    const auto a = grad.cell(idx);
    const auto z = flux.cell(idx);
    if (p[idx] == 1.0) {
      rep.max_flux_on_y = std::max(rep.max_flux_on_y, flux.magnitude(idx));
      if (r > 0.0) rep.max_alignment_gap_on_y = std::max(rep.max_alignment_gap_on_y, std::abs(r - dot(z, a)) / (eps + r));
    } else if (r > 0.0) {
      const double m = std::pow(r, p[idx] - 2.0);
      double d = 0.0;
      for (std::size_t q = 0; q < stride; ++q) d += (z[q] - m * a[q]) * (z[q] - m * a[q]);
      rep.max_relative_gap_off_y = std::max(rep.max_relative_gap_off_y, std::sqrt(d) / std::pow(r, p[idx] - 1.0));
    }
  }
  return rep;
}

FluxReport flux_constraints(const FlowResult& result, const ExponentSchedule& schedule) {
  FluxReport total;
  for (const FluxSample& s : result.flux_trace) {
    const FluxReport r = flux_constraints(s.grad, s.flux, schedule.at(s.time), result.config.eps);
    total.max_flux_on_y = std::max(total.max_flux_on_y, r.max_flux_on_y);
    total.max_alignment_gap_on_y = std::max(total.max_alignment_gap_on_y, r.max_alignment_gap_on_y);
    total.max_relative_gap_off_y = std::max(total.max_relative_gap_off_y, r.max_relative_gap_off_y);
    ++total.samples;
  }
  return total;
}

}  // namespace critflow
