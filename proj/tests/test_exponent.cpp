#include <doctest.h>

#include <cmath>
#include <vector>

#include "critflow/exponent.hpp"

using namespace critflow;

namespace {

VectorField step_image(const Grid2D& g) {
  VectorField u(g, 3);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      for (int c = 0; c < 3; ++c) u(i, j, c) = i < g.nx / 2 ? 0.1 : 0.9;
  return u;
}

}  // namespace

TEST_CASE("gap condition") {
  const std::vector<double> ok = {1.0, 1.1, 2.0, 1.5};
  CHECK(validate_gap(ok, 2.0, 0.1));
  CHECK_FALSE(validate_gap(std::vector<double>{1.05}, 2.0, 0.1));
  CHECK_FALSE(validate_gap(std::vector<double>{2.5}, 2.0, 0.1));
  CHECK_FALSE(validate_gap(std::vector<double>{0.9}, 2.0, 0.1));
  CHECK_FALSE(validate_gap(std::vector<double>{NAN}, 2.0, 0.1));

  const Grid2D g(2, 2, 1.0);
  CHECK_THROWS_AS(ExponentField(g, {1.0, 1.05, 2.0, 2.0}, 2.0), InvalidInput);
  CHECK_THROWS_AS(ExponentField(g, {1.0, 1.0, 1.0}, 2.0), InvalidInput);
  const ExponentField p(g, {1.0, 1.2, 2.0, 1.7}, 2.0);
  CHECK(p.p_minus() == 1.0);
  CHECK(p.p_plus() == 2.0);
  CHECK(p.dual_exponent() == doctest::Approx(2.0));
  CHECK(std::isinf(ExponentField::constant(g, 1.0).dual_exponent()));
  const CellMask y = critical_mask(p);
  CHECK(y.count() == 1);
  CHECK(y[0]);
}

TEST_CASE("edge-adaptive exponent on a constant image is p_max everywhere") {
  const Grid2D g(16, 16, 1.0);
  const VectorField u(g, 3, 0.4);
  const ExponentField p = edge_adaptive_exponent(u, 1.5, 100.0, 2.5, 0.1);
  for (double v : p.values()) CHECK(v == 2.5);
  CHECK_FALSE(critical_mask(p).any());
}

TEST_CASE("edge-adaptive exponent puts Y along a step") {
  const Grid2D g(32, 16, 1.0);
  const ExponentField p = edge_adaptive_exponent(step_image(g), 1.0, 1e4, 2.0, 0.1);
  const CellMask y = critical_mask(p);
  CHECK(y.any());
  for (int j = 0; j < g.ny; ++j) {
    // the band sits at the jump between columns 15 and 16, the far field stays at p_max
    CHECK(y.at(15, j));
    CHECK(p.values()[g.index(0, j)] == doctest::Approx(2.0));
    CHECK(p.values()[g.index(g.nx - 1, j)] == doctest::Approx(2.0));
    for (int i = 0; i < g.nx; ++i)
      if (y.at(i, j)) CHECK(std::abs(i - 15) <= 4);
  }
  // every value satisfies the gap condition
  CHECK(validate_gap(p, 0.1));
}

TEST_CASE("edge-adaptive exponent follows the closed form away from snapping") {
  // linear ramp: |grad| = a exactly (except the last column)
  const Grid2D g(8, 8, 1.0);
  VectorField u(g, 1);
  const double a = 0.05, k = 100.0, pmax = 3.0;
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) u(i, j, 0) = a * i;
  const ExponentField p = edge_adaptive_exponent(u, 0.0, k, pmax, 0.1);
  CHECK(p.values()[g.index(3, 3)] == doctest::Approx(1.0 + (pmax - 1.0) / (1.0 + k * a * a)));
  CHECK(p.values()[g.index(7, 3)] == pmax);
  // steeper ramp snaps to 1
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) u(i, j, 0) = 2.0 * i;
  CHECK(edge_adaptive_exponent(u, 0.0, k, pmax, 0.1).values()[g.index(3, 3)] == 1.0);
}

TEST_CASE("edge-adaptive exponent validates parameters") {
  const Grid2D g(4, 4, 1.0);
  const VectorField u(g, 1);
  CHECK_THROWS_AS(edge_adaptive_exponent(u, -1.0, 1.0, 2.0, 0.1), InvalidInput);
  CHECK_THROWS_AS(edge_adaptive_exponent(u, 1.0, 0.0, 2.0, 0.1), InvalidInput);
  CHECK_THROWS_AS(edge_adaptive_exponent(u, 1.0, 1.0, 1.05, 0.1), InvalidInput);
}

TEST_CASE("schedules") {
  const Grid2D g(4, 4, 1.0);
  const ExponentField a = ExponentField::constant(g, 1.5, 0.1);
  const ExponentField b = ExponentField::constant(g, 1.5, 0.1);
  std::vector<double> vals(g.cells(), 2.0);
  vals[0] = 1.0;
  const ExponentField c(g, vals, 2.0);

  CHECK_THROWS_AS(ExponentSchedule({0.0, 0.0}, {a, b}), InvalidInput);
  CHECK_THROWS_AS(ExponentSchedule({0.0, 1.0}, {a, c}), InvalidInput);  // p_plus differs
  const ExponentSchedule s({0.0, 0.5}, {ExponentField(g, std::vector<double>(g.cells(), 1.5), 2.0), c});
  CHECK(s.at(0.0)[0] == 1.5);
  CHECK(s.at(0.49)[0] == 1.5);
  CHECK(s.at(0.5)[0] == 1.0);
  CHECK(s.at(9.0)[0] == 1.0);
  CHECK_FALSE(s.time_independent());
  CHECK(s.p_minus() == 1.0);
  CHECK(ExponentSchedule::constant(a).time_independent());

  const ExponentSchedule frozen = schedule_from_rule(frozen_rule(c), std::vector<double>{0.0, 1.0, 2.0});
  CHECK(frozen.size() == 3);
  CHECK(frozen.at(1.5) == c);
}

TEST_CASE("linear blend keeps the critical set") {
  const Grid2D g(3, 3, 1.0);
  std::vector<double> from(g.cells(), 1.5), to(g.cells(), 3.0);
  from[4] = to[4] = 1.0;
  const auto rule = linear_blend_rule(ExponentField(g, from, 1.5), ExponentField(g, to, 3.0), 2.0);
  const ExponentField mid = rule(1.0);
  CHECK(mid[0] == doctest::Approx(2.25));
  CHECK(mid[4] == 1.0);
  CHECK(mid.p_plus() == 3.0);
  CHECK(rule(5.0)[0] == doctest::Approx(3.0));

  std::vector<double> moved = to;
  moved[4] = 2.0;
  CHECK_THROWS_AS(linear_blend_rule(ExponentField(g, from, 1.5), ExponentField(g, moved, 3.0), 2.0),
                  InvalidInput);
}
