#include <doctest.h>

#include <cmath>
#include <random>

#include "critflow/grid.hpp"

using namespace critflow;

namespace {

VectorField random_field(const Grid2D& g, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  VectorField u(g, n);
  for (double& v : u.values()) v = uni(rng);
  return u;
}

MatrixField random_matrix(const Grid2D& g, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  MatrixField a(g, n);
  for (double& v : a.values()) v = uni(rng);
  return a;
}

// Brute-force stencils written directly from the ghost-cell definitions.
double ghost(const VectorField& u, int i, int j, int c) {
  const auto& g = u.grid();
  return u(std::min(i, g.nx - 1), std::min(j, g.ny - 1), c);
}

double flux_x(const MatrixField& a, int i, int j, int c) {
  return (i < 0 || i >= a.grid().nx - 1) ? 0.0 : a(i, j, c, 0);
}

double flux_y(const MatrixField& a, int i, int j, int c) {
  return (j < 0 || j >= a.grid().ny - 1) ? 0.0 : a(i, j, c, 1);
}

}  // namespace

TEST_CASE("grid rejects degenerate shapes") {
  CHECK_THROWS_AS(Grid2D(1, 4, 1.0), InvalidInput);
  CHECK_THROWS_AS(Grid2D(4, 4, 0.0), InvalidInput);
  CHECK_THROWS_AS(Grid2D(4, 4, -1.0), InvalidInput);
  const Grid2D g(4, 3, 0.5);
  CHECK(g.cells() == 12);
  CHECK(g.area() == doctest::Approx(3.0));
  CHECK(g.index(1, 2) == 9);
}

TEST_CASE("gradient matches forward differences with replicated ghosts") {
  const Grid2D g(7, 5, 0.3);
  const VectorField u = random_field(g, 3, 1);
  const MatrixField d = gradient(u);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      for (int c = 0; c < 3; ++c) {
        CHECK(d(i, j, c, 0) == doctest::Approx((ghost(u, i + 1, j, c) - u(i, j, c)) / g.h).epsilon(1e-14));
        CHECK(d(i, j, c, 1) == doctest::Approx((ghost(u, i, j + 1, c) - u(i, j, c)) / g.h).epsilon(1e-14));
      }
}

TEST_CASE("divergence matches backward differences with zero boundary flux") {
  const Grid2D g(6, 8, 0.25);
  const MatrixField a = random_matrix(g, 2, 2);
  const VectorField d = divergence(a);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      for (int c = 0; c < 2; ++c) {
        const double want = (flux_x(a, i, j, c) - flux_x(a, i - 1, j, c) + flux_y(a, i, j, c) -
                             flux_y(a, i, j - 1, c)) /
                            g.h;
        CHECK(d(i, j, c) == doctest::Approx(want).epsilon(1e-13));
      }
}

TEST_CASE("divergence is the negative adjoint of gradient") {
  for (int n : {1, 3}) {
    const Grid2D g(19, 13, 0.1);
    const VectorField u = random_field(g, n, 10 + n);
    const MatrixField a = random_matrix(g, n, 20 + n);
    const double lhs = inner(gradient(u), a);
    const double rhs = -inner(u, divergence(a));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * norm(gradient(u)) * norm(a));
  }
}

TEST_CASE("gradient of a linear ramp and constants") {
  const Grid2D g(8, 8, 0.125);
  VectorField u(g, 1);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) u(i, j, 0) = 2.0 * i * g.h - 3.0 * j * g.h;
  const MatrixField d = gradient(u);
  CHECK(d(3, 3, 0, 0) == doctest::Approx(2.0));
  CHECK(d(3, 3, 0, 1) == doctest::Approx(-3.0));
  CHECK(d(g.nx - 1, 3, 0, 0) == 0.0);
  CHECK(d(3, g.ny - 1, 0, 1) == 0.0);

  const VectorField c(g, 2, 0.7);
  const MatrixField gc = gradient(c);
  const VectorField lc = laplacian(c);
  for (double v : gc.values()) CHECK(v == 0.0);
  for (double v : lc.values()) CHECK(v == 0.0);
}

TEST_CASE("laplacian is the Neumann 5-point stencil") {
  const Grid2D g(5, 6, 0.5);
  const VectorField u = random_field(g, 1, 3);
  const VectorField l = laplacian(u);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double s = 0.0;
      const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const int a = i + di[k], b = j + dj[k];
        if (a < 0 || b < 0 || a >= g.nx || b >= g.ny) continue;
        s += u(a, b, 0) - u(i, j, 0);
      }
      CHECK(l(i, j, 0) == doctest::Approx(s / g.cell_area()).epsilon(1e-13));
    }
}

TEST_CASE("inner products are h^2 weighted and check shapes") {
  const Grid2D g(4, 4, 0.5);
  const VectorField one(g, 2, 1.0);
  CHECK(inner(one, one) == doctest::Approx(2.0 * g.area()));
  CHECK(norm(one) == doctest::Approx(std::sqrt(2.0 * g.area())));
  CHECK_THROWS_AS(inner(one, VectorField(g, 3, 1.0)), InvalidInput);
  CHECK_THROWS_AS(inner(one, VectorField(Grid2D(4, 4, 0.25), 2, 1.0)), InvalidInput);
}

TEST_CASE("field arithmetic") {
  const Grid2D g(3, 3, 1.0);
  VectorField a(g, 1, 2.0), b(g, 1, 5.0);
  CHECK((a + b).values()[4] == 7.0);
  CHECK((b - a).values()[0] == 3.0);
  CHECK((3.0 * a).values()[8] == 6.0);
  a.axpy(-2.0, b);
  CHECK(a.values()[1] == -8.0);
  CHECK(a.all_finite());
  a.values()[2] = NAN;
  CHECK_FALSE(a.all_finite());
  CHECK_THROWS_AS(VectorField(g, 2, std::vector<double>(5)), InvalidInput);
}

TEST_CASE("cell masks") {
  const Grid2D g(7, 7, 1.0);
  CellMask m(g);
  m.set(3, 3, true);
  CHECK(m.count() == 1);
  const CellMask d = m.dilated(1);
  CHECK(d.count() == 9);
  CHECK(d.contains(m));
  CHECK_FALSE(m.contains(d));
  CHECK(m.dilated(10).count() == 49);
  CHECK(m.complement().count() == 48);
  CHECK(CellMask::full(g).contains(d));
  CHECK_FALSE(CellMask::empty(g).any());
}

TEST_CASE("channel means and Gaussian blur") {
  const Grid2D g(9, 9, 1.0);
  VectorField u(g, 2);
  for (int j = 0; j < 9; ++j)
    for (int i = 0; i < 9; ++i) {
      u(i, j, 0) = 1.0;
      u(i, j, 1) = i == 4 && j == 4 ? 81.0 : 0.0;
    }
  const auto means = channel_means(u);
  CHECK(means[0] == doctest::Approx(1.0));
  CHECK(means[1] == doctest::Approx(1.0));

  CHECK(gaussian_blur(u, 0.0) == u);
  const VectorField b = gaussian_blur(u, 1.0);
  // constants are preserved, an interior impulse keeps its mass and symmetry
  CHECK(b(0, 0, 0) == doctest::Approx(1.0));
  CHECK(channel_means(b)[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b(3, 4, 1) == doctest::Approx(b(5, 4, 1)));
  CHECK(b(4, 3, 1) == doctest::Approx(b(3, 4, 1)));
  CHECK(b(4, 4, 1) < 81.0);
  CHECK_THROWS_AS(gaussian_blur(u, -1.0), InvalidInput);
}
