#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "harvest/grid.hpp"

using namespace harvest;

namespace {

std::vector<double> sample(const Grid1D& g, double (*f)(double)) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g[i]);
  return v;
}

}  // namespace

TEST_CASE("graded grid is uniform in u and hits its ends") {
  Grid1D g(1e-4, 1.05, 401, 0.02);
  CHECK(g.lo() == 1e-4);
  CHECK(g.hi() == 1.05);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    CHECK(g[i + 1] > g[i]);
    CHECK(g.to_u(g[i + 1]) - g.to_u(g[i]) == doctest::Approx(g.du()).epsilon(1e-9));
  }
  for (double x : {1e-4, 0.003, 0.2, 0.74, 1.0}) CHECK(g.from_u(g.to_u(x)) == doctest::Approx(x).epsilon(1e-14));
  auto [i, t] = g.locate(g[17]);
  CHECK(((i == 17 && t < 1e-9) || (i == 16 && t > 1.0 - 1e-9)));
  CHECK(g.nearest(g.midpoint(30) - 1e-9) == 30);
  CHECK(g.nearest(g.midpoint(30) + 1e-9) == 31);
  CHECK(g.last_below(g[10]) == 9);
  CHECK(g.last_below(g.lo()) == Grid1D::npos);
}

TEST_CASE("uniform grid when grading is zero") {
  Grid1D g(0.0, 1.0, 11, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(0.1 * i));
  CHECK(g.dx_du(0.4) == 1.0);
  CHECK(g.d2x_du2(0.4) == 0.0);
}

TEST_CASE("mapping derivatives match finite differences") {
  Grid1D g(1e-3, 2.0, 11, 0.05);
  for (double x : {0.01, 0.2, 1.5}) {
    const double u = g.to_u(x);
    const double h = 1e-5;
    const double d1 = (g.from_u(u + h) - g.from_u(u - h)) / (2 * h);
    CHECK(g.dx_du(x) == doctest::Approx(d1).epsilon(1e-8));
    const double d2 = (g.dx_du(g.from_u(u + h)) - g.dx_du(g.from_u(u - h))) / (2 * h);
    CHECK(g.d2x_du2(x) == doctest::Approx(d2).epsilon(1e-6));
    const double d3 = (g.d2x_du2(g.from_u(u + h)) - g.d2x_du2(g.from_u(u - h))) / (2 * h);
    CHECK(g.d3x_du3(x) == doctest::Approx(d3).epsilon(1e-5));
  }
}

TEST_CASE("fornberg weights reproduce classical stencils") {
  std::vector<double> pts{-2, -1, 0, 1, 2};
  auto w = fornberg_weights(0.0, pts, 2);
  CHECK(w[0][2] == doctest::Approx(1.0));
  CHECK(w[1][0] == doctest::Approx(1.0 / 12));
  CHECK(w[1][1] == doctest::Approx(-8.0 / 12));
  CHECK(w[1][3] == doctest::Approx(8.0 / 12));
  CHECK(w[2][2] == doctest::Approx(-30.0 / 12));
  CHECK(w[2][0] == doctest::Approx(-1.0 / 12));
}

TEST_CASE("node derivatives are fourth-order on a graded grid") {
  auto err = [](std::size_t n) {
    Grid1D g(0.05, 2.0, n, 0.1);
    auto v = sample(g, [](double x) { return std::sin(3 * x); });
    auto d = node_derivatives(g, v);
    double e1 = 0.0;
    double e2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      e1 = std::max(e1, std::abs(d.d1[i] - 3 * std::cos(3 * g[i])));
      e2 = std::max(e2, std::abs(d.d2[i] + 9 * std::sin(3 * g[i])));
    }
    return std::pair{e1, e2};
  };
  auto [a1, a2] = err(201);
  auto [b1, b2] = err(401);
  CHECK(a1 / b1 > 12.0);
  CHECK(a2 / b2 > 6.0);
  CHECK(b1 < 1e-6);
}

TEST_CASE("break-aware stencils do not see across a kink") {
  Grid1D g(0.0, 1.0, 201, 0.0);
  const double br = 0.4025;
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g[i];
    v[i] = x < br ? x * x : br * br + 2 * br * (x - br) + std::pow(x - br, 3);
  }
  auto d = node_derivatives(g, v, br);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g[i];
    const double exact2 = x < br ? 2.0 : 6 * (x - br);
    CHECK(d.d2[i] == doctest::Approx(exact2).epsilon(1e-7).scale(1.0));
  }
  auto left = sided_derivatives(g, v, br, br, Side::left);
  auto right = sided_derivatives(g, v, br, br, Side::right);
  CHECK(left.d2 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(left.d3 == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(right.d2 == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
  CHECK(right.d3 == doctest::Approx(6.0).epsilon(1e-8));
}

TEST_CASE("gridded function interpolates and extrapolates") {
  auto g = std::make_shared<Grid1D>(1e-3, 1.0, 301, 0.02);
  auto v = sample(*g, [](double x) { return std::pow(x, 0.2) * (1.0 + x); });
  GriddedFunction f(g, v, kNoBreak, Tail::power_law, Tail::clamp);
  for (double x : {0.002, 0.05, 0.3, 0.77}) {
    CHECK(f(x) == doctest::Approx(std::pow(x, 0.2) * (1 + x)).epsilon(1e-6));
    const double d = 0.2 * std::pow(x, -0.8) * (1 + x) + std::pow(x, 0.2);
    CHECK(f.derivative(x) == doctest::Approx(d).epsilon(1e-4));
  }
  CHECK(f(2.0) == doctest::Approx(v.back()));
  CHECK(f.derivative(2.0) == 0.0);
  CHECK(f(5e-4) == doctest::Approx(std::pow(5e-4, 0.2)).epsilon(2e-3));

  auto lin = sample(*g, [](double x) { return x; });
  GriddedFunction fl(g, lin, kNoBreak, Tail::power_law);
  CHECK(fl(1e-4) == doctest::Approx(1e-4).epsilon(1e-3));
  CHECK_THROWS_AS(GriddedFunction(g, std::vector<double>(3, 0.0)), std::invalid_argument);
}
