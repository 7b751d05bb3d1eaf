#include <doctest.h>

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "critflow/proximal.hpp"

using namespace critflow;

namespace {

VectorField smooth(const Grid2D& g, int n, double phase = 0.0) {
  VectorField u(g, n);
  const double pi = std::numbers::pi;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      for (int c = 0; c < n; ++c) {
        const double x = (i + 0.5) * g.h, y = (j + 0.5) * g.h;
        u(i, j, c) = 0.5 + 0.3 * std::sin(pi * (x + phase)) * std::cos((c + 1) * pi * y) + 0.2 * x * y;
      }
  return u;
}

// Dense Gaussian elimination with partial pivoting.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

ProxConfig make_config(const VectorField& u0, const ExponentField& p, double tau, std::size_t steps) {
  ProxConfig cfg;
  cfg.u0 = u0;
  cfg.p = p;
  cfg.tau = tau;
  cfg.steps = steps;
  return cfg;
}

}  // namespace

TEST_CASE("p = 2 step solves the implicit heat equation") {
  const Grid2D g(16, 16, 1.0 / 16);
  const VectorField u = smooth(g, 1);
  const double tau = 1e-2;
  const std::size_t n = g.cells();
  // columns of I - tau Lap_h from unit vectors
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (std::size_t col = 0; col < n; ++col) {
    VectorField e(g, 1);
    e.values()[col] = 1.0;
    const VectorField le = laplacian(e);
    for (std::size_t r = 0; r < n; ++r) a[r][col] = (r == col ? 1.0 : 0.0) - tau * le.values()[r];
  }
  const std::vector<double> b(u.values().begin(), u.values().end());
  const VectorField want(g, 1, dense_solve(a, b));

  const ProxStep step = prox_step(u, ExponentField::constant(g, 2.0), tau, 1e-12, 1e-10);
  CHECK(step.converged);
  CHECK(norm(step.v - want) <= 1e-4 * norm(want));
  CHECK(step.objective_change <= 0.0);
  CHECK(step.grad_norm <= 1e-10 * (1.0 + step.initial_grad_norm));
}

TEST_CASE("constant data is a fixed point") {
  const Grid2D g(8, 8, 0.125);
  const VectorField c(g, 3, 0.3);
  std::vector<double> pv(g.cells(), 1.8);
  pv[10] = 1.0;
  const ProxStep step = prox_step(c, ExponentField(g, pv, 2.0), 0.1, 1e-6, 1e-8);
  CHECK(step.converged);
  CHECK(step.v == c);
  CHECK(step.iterations == 0);
}

TEST_CASE("semigroup invariants") {
  const Grid2D g(12, 12, 1.0 / 12);
  std::vector<double> pv(g.cells(), 1.5);
  for (int j = 0; j < g.ny; ++j) pv[g.index(6, j)] = 1.0;
  const ExponentField p(g, pv, 2.0);
  const VectorField u0 = smooth(g, 3);
  ProxConfig cfg = make_config(u0, p, 0.01, 3);
  cfg.eps_inner = 1e-4;
  const SemigroupResult r = run_semigroup(cfg);
  CHECK_FALSE(r.warning);
  CHECK(r.trajectory.size() == 4);
  CHECK(r.trajectory.dt() == 0.01);
  CHECK(r.energies.size() == 4);
  for (std::size_t k = 1; k < r.energies.size(); ++k) CHECK(r.energies[k] <= r.energies[k - 1]);
  for (const ProxStep& s : r.steps) {
    CHECK(s.objective_change <= 0.0);
    CHECK(s.v.values().empty());
  }
  const auto m0 = channel_means(u0), m1 = channel_means(r.trajectory.back());
  for (std::size_t c = 0; c < m0.size(); ++c) CHECK(std::abs(m1[c] - m0[c]) <= 1e-8);

  // non-expansive in L^2
  const VectorField w0 = smooth(g, 3, 0.3);
  cfg.u0 = w0;
  const SemigroupResult rw = run_semigroup(cfg);
  CHECK(norm(r.trajectory.back() - rw.trajectory.back()) <= norm(u0 - w0) * (1.0 + 1e-6));
}

TEST_CASE("halving tau approaches the fine-step limit") {
  const Grid2D g(10, 10, 0.1);
  const ExponentField p = ExponentField::constant(g, 1.6);
  const VectorField u0 = smooth(g, 1);
  const double T = 0.04;
  const VectorField ref = run_semigroup(make_config(u0, p, T / 16, 16)).trajectory.back();
  const double e1 = norm(run_semigroup(make_config(u0, p, T / 2, 2)).trajectory.back() - ref);
  const double e2 = norm(run_semigroup(make_config(u0, p, T / 4, 4)).trajectory.back() - ref);
  CHECK(e2 < e1);
}

TEST_CASE("edge cases") {
  const Grid2D g(8, 8, 0.125);
  const VectorField u0 = smooth(g, 1);
  const ExponentField p = ExponentField::constant(g, 1.5);

  const SemigroupResult none = run_semigroup(make_config(u0, p, 0.1, 0));
  CHECK(none.trajectory.size() == 1);
  CHECK(none.trajectory.front() == u0);
  CHECK(none.energies.size() == 1);

  ProxConfig tight = make_config(u0, p, 0.1, 2);
  tight.max_inner = 1;
  CHECK(run_semigroup(tight).warning);

  ProxConfig dflt = make_config(u0, p, 0.1, 1);
  dflt.tau.reset();
  CHECK(dflt.resolved_tau() == 0.125);
  CHECK(run_semigroup(dflt).trajectory.dt() == 0.125);

  CHECK_THROWS_AS(run_semigroup(make_config(u0, p, -1.0, 1)), InvalidInput);
}

TEST_CASE("subgradient inequality") {
  const Grid2D g(10, 10, 0.1);
  std::vector<double> pv(g.cells());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) pv[g.index(i, j)] = i == 4 ? 1.0 : 1.4 + 0.05 * j;
  const ExponentField p(g, pv, 2.0);
  const VectorField u0 = smooth(g, 2);
  ProxConfig cfg = make_config(u0, p, 0.02, 3);
  cfg.eps_inner = 1e-4;
  cfg.tol = 1e-10;
  const SemigroupResult r = run_semigroup(cfg);
  const double scale = r.energies.front();

  CHECK(subgradient_check(r.trajectory, p, cfg.eps_inner, {}) == 0.0);
  CHECK(subgradient_check(r.trajectory, p, cfg.eps_inner, {VectorField(g, 2)}) == doctest::Approx(0.0).epsilon(1e-12));
  // probing with the step itself: h = u^k - u^{k+1}
  const VectorField back = r.trajectory[0] - r.trajectory[1];
  CHECK(subgradient_check(r.trajectory, p, cfg.eps_inner, {back, smooth(g, 2, 0.7)}) >= -1e-6 * scale);
}
