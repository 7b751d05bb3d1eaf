/// @file proximal.hpp
/// @brief Minimizing-movement (implicit Euler) solver for the gradient flow
///        of the smoothed energy with a time-independent exponent and no
///        fidelity term, and the subdifferential-inequality audit.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "critflow/exponent.hpp"
#include "critflow/functionals.hpp"
#include "critflow/grid.hpp"

namespace critflow {

struct ProxConfig {
  VectorField u0;
  ExponentField p;
  std::optional<double> tau;  ///< outer step; nullopt: the grid spacing h
  double eps_inner = 1e-6;
  double tol = 1e-8;
  std::size_t max_inner = 100000;
  std::size_t steps = 10;  ///< K

  double resolved_tau() const { return tau ? *tau : u0.grid().h; }
};

struct ProxStep {
  VectorField v;
  bool converged = false;  ///< false: max_inner hit or line search stalled; v is the best iterate
  std::size_t iterations = 0;
  double grad_norm = 0.0;          ///< ||grad J(v)||
  double initial_grad_norm = 0.0;  ///< ||grad J(u_prev)||
  double objective_change = 0.0;   ///< J(v) - J(u_prev), never positive
};

/// Approximate minimizer of
///   J(v) = psi_energy_smoothed(v, p, eps_inner) + ||v - u_prev||^2 / (2 tau)
/// by gradient descent with Armijo backtracking (constant 1e-4, shrink 0.5).
/// The first trial step of each iteration is the Barzilai-Borwein step,
/// capped at tau. Stops when ||grad J|| <= tol (1 + ||grad J(u_prev)||).
ProxStep prox_step(const VectorField& u_prev, const ExponentField& p, double tau, double eps_inner, double tol,
                   std::size_t max_inner = 100000);

struct SemigroupResult {
  Trajectory trajectory;  ///< dt = tau
  std::vector<double> energies;  ///< psi_energy_smoothed(u^k), k = 0..K
  std::vector<ProxStep> steps;   ///< per outer step, v omitted (empty field)
  bool warning = false;          ///< some inner solve did not converge
};

SemigroupResult run_semigroup(const ProxConfig& config);

/// Smallest slack of
///   Psi_eps(u^{k+1} + h) - Psi_eps(u^{k+1}) - <-(u^{k+1} - u^k) / tau, h>
/// over all steps k and probes h. Zero when there are no steps or probes.
double subgradient_check(const Trajectory& trajectory, const ExponentField& p, double eps_inner,
                         const std::vector<VectorField>& probes);

}  // namespace critflow
