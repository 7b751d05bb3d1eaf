#include "critflow/proximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace critflow {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kShrink = 0.5;

VectorField objective_gradient(const VectorField& v, const VectorField& u_prev, const ExponentField& p, double tau,
                               double eps) {
  VectorField g = psi_energy_smoothed_gradient(v, p, eps);
  g.axpy(1.0 / tau, v);
  g.axpy(-1.0 / tau, u_prev);
  return g;
}

// J(v + d) - J(v)
double objective_change(const VectorField& v, const VectorField& d, const VectorField& u_prev,
                        const ExponentField& p, double tau, double eps) {
  const VectorField r = v - u_prev;
  return psi_energy_smoothed_change(v, d, p, eps) + (2.0 * inner(d, r) + inner(d, d)) / (2.0 * tau);
}

}  // namespace

ProxStep prox_step(const VectorField& u_prev, const ExponentField& p, double tau, double eps_inner, double tol,
                   std::size_t max_inner) {
  if (!(tau > 0.0)) throw InvalidInput("prox_step: tau must be positive");
  if (!(eps_inner > 0.0)) throw InvalidInput("prox_step: eps_inner must be positive");
  if (!(tol > 0.0)) throw InvalidInput("prox_step: tol must be positive");
  if (!(u_prev.grid() == p.grid())) throw InvalidInput("prox_step: grid mismatch");
  if (!u_prev.all_finite()) throw InvalidInput("prox_step: non-finite input");

  ProxStep out;
  out.v = u_prev;
  VectorField g = objective_gradient(out.v, u_prev, p, tau, eps_inner);
  double gn = norm(g);
  out.initial_grad_norm = gn;
  out.grad_norm = gn;
  const double target = tol * (1.0 + gn);

  double alpha = tau;
  VectorField prev_v, prev_g;
  while (true) {
    if (gn <= target) {
      out.converged = true;
      break;
    }
    if (out.iterations >= max_inner) break;

    if (out.iterations > 0) {
      // Barzilai-Borwein trial step
      const VectorField s = out.v - prev_v;
      const VectorField y = g - prev_g;
      const double sy = inner(s, y);
      alpha = sy > 0.0 ? std::min(tau, inner(s, s) / sy) : tau;
    }

    VectorField d = g;
    d *= -alpha;
    double change = objective_change(out.v, d, u_prev, p, tau, eps_inner);
    bool accepted = true;
    while (!(change <= -kArmijo * alpha * gn * gn)) {
      alpha *= kShrink;
      if (alpha < tau * 1e-30) {
        accepted = false;
        break;
      }
      d *= kShrink;
      change = objective_change(out.v, d, u_prev, p, tau, eps_inner);
    }
    if (!accepted) break;

    prev_v = out.v;
    prev_g = std::move(g);
    out.v += d;
    out.objective_change += change;
    ++out.iterations;
    g = objective_gradient(out.v, u_prev, p, tau, eps_inner);
    gn = norm(g);
    out.grad_norm = gn;
  }
  return out;
}

SemigroupResult run_semigroup(const ProxConfig& config) {
  if (config.u0.size() == 0) throw InvalidInput("run_semigroup: u0 is empty");
  if (!(config.u0.grid() == config.p.grid())) throw InvalidInput("run_semigroup: grid mismatch");
  const double tau = config.resolved_tau();
  if (!(tau > 0.0)) throw InvalidInput("run_semigroup: tau must be positive");

  SemigroupResult out;
  std::vector<VectorField> slices{config.u0};
  out.energies.push_back(psi_energy_smoothed(config.u0, config.p, config.eps_inner));
  for (std::size_t k = 0; k < config.steps; ++k) {
    ProxStep step = prox_step(slices.back(), config.p, tau, config.eps_inner, config.tol, config.max_inner);
    out.warning = out.warning || !step.converged;
    out.energies.push_back(psi_energy_smoothed(step.v, config.p, config.eps_inner));
    slices.push_back(std::move(step.v));
    step.v = VectorField();
    out.steps.push_back(std::move(step));
  }
  out.trajectory = Trajectory(tau, std::move(slices));
  return out;
}

double subgradient_check(const Trajectory& trajectory, const ExponentField& p, double eps_inner,
                         const std::vector<VectorField>& probes) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) {
    const VectorField& next = trajectory[k + 1];
    VectorField w = trajectory[k] - next;
    w *= 1.0 / trajectory.dt();
    for (const VectorField& h : probes) {
      const double slack = psi_energy_smoothed_change(next, h, p, eps_inner) - inner(w, h);
      worst = std::min(worst, slack);
    }
  }
  return std::isinf(worst) ? 0.0 : worst;
}

}  // namespace critflow
