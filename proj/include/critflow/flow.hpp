/// @file flow.hpp
/// @brief Explicit Euler evolution of the eps-regularized p(t,x)-Laplacian
///        flow with a fidelity term and an optional Laplacian stabilizer,
///        plus residual checks for the weak-solution inequalities.
///
///   du/dt = div Z_eps(grad u) + f(u) + delta * Lap_h u,
///   Z_eps(A) = |A|^{2p-2} A / (eps + |A|^p).

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "critflow/exponent.hpp"
#include "critflow/functionals.hpp"
#include "critflow/grid.hpp"

namespace critflow {

/// Raised when the state stops being finite during a run.
class FlowDiverged : public std::runtime_error {
 public:
  FlowDiverged(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Reaction term f(u). Only the zero term and the linear tether
/// f(u) = lambda (g - u) are supported: both are sublinear with
/// |f| <= lambda |g| + lambda |u| and have concave u . f(u).
struct FidelitySpec {
  enum class Kind { zero, linear_tether };

  Kind kind = Kind::zero;
  double lambda = 0.0;
  VectorField target;

  static FidelitySpec none() { return {}; }
  static FidelitySpec tether(double lambda, VectorField target) {
    return {Kind::linear_tether, lambda, std::move(target)};
  }

  bool active() const { return kind == Kind::linear_tether && lambda != 0.0; }
  /// f(u), a zero field when inactive.
  VectorField evaluate(const VectorField& u) const;
};

struct FlowConfig {
  VectorField u0;
  ExponentSchedule schedule;
  double eps = 1e-2;
  double delta = 0.0;
  double T = 1.0;
  std::optional<double> dt;  ///< nullopt: use stability_dt
  FidelitySpec fidelity;
  std::size_t trace_every = 1;       ///< flux sampling interval in steps
  std::size_t trajectory_stride = 1; ///< keep every m-th slice in the trajectory
};

struct EnergyRecord {
  std::size_t step = 0;
  double time = 0.0;
  EnergyBreakdown psi;       ///< Psi(u^k) with p(t_k)
  double smoothed = 0.0;     ///< Psi_eps(u^k) with p(t_k)
  /// Psi_eps(u^{k+1}) with p frozen at t_k; NaN on the last record.
  double frozen_next = 0.0;
};

struct FluxSample {
  std::size_t step = 0;
  double time = 0.0;
  MatrixField grad;  ///< grad u^k
  MatrixField flux;  ///< Z_eps(grad u^k)
};

struct FlowDiagnostics {
  double dt = 0.0;
  std::size_t steps = 0;
  double max_step_mean_drift = 0.0;  ///< max over steps and channels
  double cumulative_mean_drift = 0.0;
};

struct FlowResult {
  FlowConfig config;
  Trajectory trajectory;  ///< slices every trajectory_stride steps
  VectorField final_state;
  std::vector<FluxSample> flux_trace;
  std::vector<EnergyRecord> energy_trace;  ///< one record per step, k = 0..steps
  FlowDiagnostics diagnostics;
};

/// Z_eps(A) for one N x 2 block; exact zero at A = 0.
std::vector<double> regularized_flux(std::span<const double> a, double p, double eps);

/// (Z(xi) - Z(eta)) . (xi - eta); non-negative up to round-off.
double monotonicity_gap(std::span<const double> xi, std::span<const double> eta, double p, double eps);

/// Z_eps(grad u) cellwise.
MatrixField flux_field(const MatrixField& grad, const ExponentField& p, double eps);

/// div Z_eps(grad u) + f(u) + delta * laplacian(u).
VectorField rhs(const VectorField& u, const ExponentField& p_slice, double eps, double delta,
                const FidelitySpec& fidelity, double t);

/// Sup of directional difference quotients of A -> Z_eps(A) over
/// `probes` samples with |A| <= probe_radius, for each exponent that
/// occurs in the schedule (or a quantile subset of them).
double flux_lipschitz_estimate(const ExponentSchedule& schedule, double eps, double probe_radius,
                               std::size_t probes = 10000);

/// safety * h^2 / (2n (L_flux + delta)), safety = 0.9. A tether of
/// strength lambda adds lambda to the denominator as 1/dt terms:
/// dt = safety / (2n (L_flux + delta) / h^2 + lambda).
double stability_dt(const ExponentSchedule& schedule, double eps, double delta, const Grid2D& grid,
                    double probe_radius, double lambda = 0.0);

/// Probe radius run_flow uses: twice the largest cell gradient of u0,
/// at least 1.
double default_probe_radius(const VectorField& u0);

FlowResult run_flow(const FlowConfig& config);

struct WeakResidual {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual() const { return lhs - rhs; }
  /// Explicit Euler remainder sum_k ||D(u - w)||^2 - ||Dw||^2. The
  /// residual of an exact explicit solve is bounded by this number.
  double time_defect = 0.0;
  std::size_t steps = 0;
};

struct WeakResidualOptions {
  /// false: the eps-regularized inequality the approximate solution obeys
  /// (off-U term with Z_eps(grad w), plus 2 eps |U| and the delta term).
  /// true: the limit form with |grad w|^{p-2} grad w and no eps/delta terms.
  bool limit_form = false;
};

/// LHS - RHS of the discrete energy inequality tested by w on the region U
/// (U must contain the critical set), truncated at t_star. Requires a
/// trajectory stored at every step and w on the same time grid.
WeakResidual weak_residual(const FlowResult& result, const Trajectory& w, const SpaceTimeMask& region,
                           const ExponentSchedule& schedule, double t_star,
                           const WeakResidualOptions& options = {});

struct FluxReport {
  double max_flux_on_y = 0.0;          ///< max |Z| over Y, contract <= 1
  double max_alignment_gap_on_y = 0.0; ///< max ||grad u| - Z.grad u| / (eps + |grad u|) over Y
  double max_relative_gap_off_y = 0.0; ///< max |Z - |grad u|^{p-2} grad u| / |grad u|^{p-1} off Y
  std::size_t samples = 0;
};

FluxReport flux_constraints(const MatrixField& grad, const MatrixField& flux, const ExponentField& p,
                            double eps);
FluxReport flux_constraints(const FlowResult& result, const ExponentSchedule& schedule);

}  // namespace critflow
