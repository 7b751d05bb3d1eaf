#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <random>
#include <vector>

#include "critflow/kernels.hpp"

namespace k = critflow::kernels;

namespace {

struct Case {
  k::Layout layout;
  std::vector<double> u, grad, p;
};

Case make_case(int nx, int ny, int n, unsigned seed) {
  Case c{{nx, ny, n, 1.0 / nx}, {}, {}, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  c.u.resize(c.layout.cells() * n);
  for (double& v : c.u) v = uni(rng);
  c.grad.resize(c.layout.cells() * n * 2);
  for (double& v : c.grad) v = uni(rng);
  // a few exact zeros exercise the A = 0 branch
  for (std::size_t q = 0; q < 2 * static_cast<std::size_t>(n); ++q) c.grad[q] = 0.0;
  c.p.resize(c.layout.cells());
  for (double& v : c.p) v = uni(rng) < 0.0 ? 1.0 : 1.1 + 1.5 * (uni(rng) + 1.0);
  return c;
}

}  // namespace

TEST_CASE("serial and OpenMP maps are bit-identical") {
  for (int n : {1, 3}) {
    const Case c = make_case(37, 29, n, 7 + n);
    std::vector<double> a(c.grad.size()), b(c.grad.size());
    k::serial::gradient(c.layout, c.u, a);
    k::omp::gradient(c.layout, c.u, b);
    CHECK(a == b);

    std::vector<double> da(c.u.size()), db(c.u.size());
    k::serial::divergence(c.layout, c.grad, da);
    k::omp::divergence(c.layout, c.grad, db);
    CHECK(da == db);

    k::serial::regularized_flux(c.layout, c.grad, c.p, 1e-3, a);
    k::omp::regularized_flux(c.layout, c.grad, c.p, 1e-3, b);
    CHECK(a == b);
  }
}

TEST_CASE("serial and OpenMP reductions agree to round-off") {
  const Case c = make_case(64, 48, 3, 11);
  const double es = k::serial::smoothed_energy(c.layout, c.grad, c.p, 1e-2);
  const double eo = k::omp::smoothed_energy(c.layout, c.grad, c.p, 1e-2);
  CHECK(eo == doctest::Approx(es).epsilon(1e-13));
  const double ds = k::serial::dot(c.u, c.u);
  const double dd = k::omp::dot(c.u, c.u);
  CHECK(dd == doctest::Approx(ds).epsilon(1e-13));
}

TEST_CASE("OpenMP reductions do not depend on the thread count") {
  const Case c = make_case(101, 77, 3, 12);
  const int saved = omp_get_max_threads();
  std::vector<double> energy, dots;
  for (int threads : {1, 2, 3, 8}) {
    omp_set_num_threads(threads);
    energy.push_back(k::omp::smoothed_energy(c.layout, c.grad, c.p, 1e-2));
    dots.push_back(k::omp::dot(c.u, c.grad));
  }
  omp_set_num_threads(saved);
  for (std::size_t t = 1; t < energy.size(); ++t) {
    CHECK(energy[t] == energy[0]);
    CHECK(dots[t] == dots[0]);
  }
}

TEST_CASE("flux factor and potential") {
  CHECK(k::flux_factor(0.0, 1.0, 1e-3) == 0.0);
  CHECK(k::flux_factor(2.0, 2.0, 0.5) == doctest::Approx(4.0 / 4.5));
  // p = 1: |Z| = r / (eps + r) < 1
  CHECK(k::flux_factor(1e6, 1.0, 1e-4) * 1e6 < 1.0);
  // d/dr of the potential is r * flux_factor(r)
  for (double p : {1.0, 1.5, 3.0})
    for (double r : {1e-3, 0.3, 2.0}) {
      const double h = 1e-6 * r;
      const double fd = (k::smoothed_potential(r + h, p, 1e-2) - k::smoothed_potential(r - h, p, 1e-2)) / (2 * h);
      CHECK(fd == doctest::Approx(r * k::flux_factor(r, p, 1e-2)).epsilon(1e-6));
    }
}
