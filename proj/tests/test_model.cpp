#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "harvest/model.hpp"

using namespace harvest;

TEST_CASE("growth_eval closed forms") {
  auto g0 = growth_eval(0.0, 1.0, 1.0);
  CHECK(g0.g == 0.0);
  CHECK(g0.dg == doctest::Approx(1.0));
  CHECK(g0.d2g == doctest::Approx(-2.0));
  auto gk = growth_eval(1.0, 1.0, 1.0);
  CHECK(gk.g == doctest::Approx(0.0));
  CHECK(gk.dg == doctest::Approx(-1.0));
  auto gm = growth_eval(0.5, 1.0, 1.0);
  CHECK(gm.g == doctest::Approx(0.25));
  CHECK(gm.dg == doctest::Approx(0.0));
  CHECK_THROWS_AS(growth_eval(-0.1, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("margin_eval closed forms") {
  EconParams e{2.0, 1.0, 1.0, 0.05, 1.0};
  auto m1 = margin_eval(1.0, e);
  CHECK(m1.l0 == doctest::Approx(1.0));
  CHECK(m1.h0 == doctest::Approx(1.0));
  CHECK(m1.m == doctest::Approx(1.0));
  CHECK(m1.dm == doctest::Approx(1.0));
  auto m2 = margin_eval(0.5, e);
  CHECK(m2.l0 == doctest::Approx(0.0));
  CHECK(m2.dm == doctest::Approx(4.0));
  e.c = 0.0;
  auto m3 = margin_eval(0.5, e);
  CHECK(m3.l0 == doctest::Approx(1.0));
  CHECK(m3.h0 == doctest::Approx(0.5));
  CHECK(m3.m == doctest::Approx(2.0));
  CHECK(m3.dm == 0.0);
  CHECK_THROWS_AS(margin_eval(0.0, e), std::invalid_argument);
}

TEST_CASE("controlled drift") {
  Model model(BioParams{}, EconParams{});
  CHECK(controlled_drift(0.5, 0.0, model) == doctest::Approx(0.25));
  CHECK(controlled_drift(0.5, 0.5, model) == doctest::Approx(0.0));
  CHECK(controlled_drift(0.5, 1.0, model) == doctest::Approx(-0.25));
  CHECK_THROWS_AS(controlled_drift(0.5, 1.5, model), std::invalid_argument);
  CHECK_THROWS_AS(controlled_drift(0.5, -0.1, model), std::invalid_argument);
}

TEST_CASE("growth and margin invariants over a sweep") {
  Model model(BioParams{1.3, 2.0}, EconParams{2.0, 0.7, 0.4, 0.05, 3.0});
  for (int i = 1; i <= 200; ++i) {
    const double x = 0.01 * i;
    const auto g = model.growth(x);
    CHECK(g.d2g < 0.0);
    CHECK(g.g - x * g.dg >= -1e-14);
    CHECK(model.margin(x).dm >= 0.0);
    const double e = model.singular_effort(x);
    if (e >= 0.0 && e <= model.econ().e_max) CHECK(std::abs(model.drift(x, e)) < 1e-14);
  }
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(Model(BioParams{-1.0, 1.0}, EconParams{}), std::invalid_argument);
  CHECK_THROWS_AS(Model(BioParams{1.0, 0.0}, EconParams{}), std::invalid_argument);
  CHECK_THROWS_AS(Model(BioParams{}, EconParams{1.0, 1.0, 1.0, 0.05, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Model(BioParams{}, EconParams{2.0, 1.0, -1.0, 0.05, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Model(BioParams{}, EconParams{2.0, 1.0, 1.0, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Model(BioParams{}, EconParams{2.0, 1.0, 1.0, 0.05, 0.0}), std::invalid_argument);
  JumpRates bad{-1.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("custom growth law is routed through the model") {
  auto linear = GrowthLaw::custom("linear", [](double x, double r, double) {
    return GrowthDerivs{r * x, r, 0.0};
  });
  Model model(BioParams{}, EconParams{}, linear);
  CHECK(model.growth(0.3).g == doctest::Approx(0.3));
  CHECK_FALSE(model.growth_law().is_logistic());
  CHECK(model.with_growth_rate(2.0).growth(0.3).g == doctest::Approx(0.6));
}
