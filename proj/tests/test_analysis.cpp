#include <cmath>

#include "doctest.h"
#include "harvest/analysis.hpp"

using namespace harvest;

namespace {

Model baseline() { return Model(BioParams{1.0, 1.0}, EconParams{2.0, 1.0, 1.0, 0.05, 1.0}); }
Model costless() { return Model(BioParams{1.0, 1.0}, EconParams{2.0, 1.0, 0.0, 0.05, 1.0}); }
KernelSpec identity() { return KernelSpec::uniform(1.0, 1.0); }

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

TEST_CASE("sigma reduces without effort cost") {
  const Model m = costless();
  auto v = solve_value_1d(m, identity(), 0.0);
  const double xs = v.x_star;
  const double vp = v.function().derivative(xs);
  const double expected = -m.growth(xs).d2g * vp * xs;
  CHECK(sigma(xs, v, m) == doctest::Approx(expected).epsilon(1e-5));
  CHECK(sigma(xs, v, m) > 0.0);
}

TEST_CASE("sigma with linear growth matches the defining expression") {
  const double a = 0.3;
  const GrowthLaw linear = GrowthLaw::custom("linear", [a](double x, double r, double) {
    return GrowthDerivs{a * r * x, a * r, 0.0};
  });
  const Model m(BioParams{1.0, 1.0}, EconParams{2.0, 1.0, 1.0, 0.05, 1.0}, linear);
  // V(x) = x^3 gives V' = 3x^2, V'' = 6x.
  for (double x : {0.2, 0.6, 0.9}) {
    const double v1 = 3 * x * x;
    const double v2 = 6 * x;
    CHECK(sigma_from(x, v1, v2, m) == doctest::Approx((0.05 - a) * (v1 + v2 * x)).epsilon(1e-14));
  }
  const Model lm(BioParams{1.0, 1.0}, EconParams{2.0, 1.0, 1.0, 0.05, 1.0});
  const double x = 0.6;
  const double h = 1e-4;
  auto g_over_x = [&](double y) { return lm.growth(y).g / y; };
  const double d = (g_over_x(x + h) - g_over_x(x - h)) / (2 * h);
  const double v1 = 1.3;
  const double v2 = 0.7;
  const auto gr = lm.growth(x);
  const double direct = -x * x * v2 * d + (0.05 - gr.dg) * (v1 + v2 * x) - gr.d2g * v1 * x;
  CHECK(sigma_from(x, v1, v2, lm) == doctest::Approx(direct).epsilon(1e-7));
}

TEST_CASE("smooth fit and kink structure at the threshold") {
  const Model m = baseline();
  GridSpec coarse;
  coarse.n = 1301;
  auto rep = regularity_check(solve_value_1d(m, identity(), 0.0, coarse), m);
  CHECK(rep.spacing <= 1e-3);
  CHECK(rep.m_prime_at_star == doctest::Approx(1.0 / (rep.x_star * rep.x_star)));
  CHECK(rep.smooth_fit());

  GridSpec fine;
  fine.n = 2501;
  auto r2 = regularity_check(solve_value_1d(m, identity(), 0.0, fine), m);
  CHECK(r2.spacing <= 5e-4);
  CHECK(r2.smooth_fit());
  CHECK(r2.kink_signs());
  CHECK(r2.kink_ratios());
  CHECK(r2.ratio == doctest::Approx(r2.ratio_predicted).epsilon(0.1));
  CHECK(r2.singular_effort == doctest::Approx(1.0 - r2.x_star));
}

TEST_CASE("identity kernel has no sensitivity") {
  auto rep = lambda_sensitivity(baseline(), identity(), 1e-3);
  CHECK(rep.discriminant == 0.0);
  CHECK(rep.prediction == 0);
  CHECK_FALSE(rep.resolved);
  CHECK(rep.agree);
  CHECK(rep.lambdas.front() == 0.0);
  for (std::size_t k = 1; k < rep.lambdas.size(); ++k) CHECK(rep.lambdas[k] > rep.lambdas[k - 1]);
}

TEST_CASE("asymmetric kernel: direction follows the mean") {
  for (double mean : {0.5, -0.5}) {
    const auto k = KernelSpec::centered(0.05, DiscreteDistribution::two_point_mean(mean));
    auto rep = lambda_sensitivity(baseline(), k, 1e-3);
    CHECK_FALSE(rep.ambiguous);
    CHECK(rep.resolved);
    CHECK(rep.agree);
    CHECK(sign_of(rep.slope_at_zero) == sign_of(mean));
    CHECK(std::abs(rep.slope_at_zero - rep.slope_half_step) < 0.1 * std::abs(rep.slope_at_zero));
  }
}

TEST_CASE("asymmetric discriminant is first order in the jump size") {
  const Model m = baseline();
  auto sc = discriminant_scaling(m, DiscreteDistribution::two_point_mean(0.5), {0.02, 0.04, 0.08});
  CHECK(sc.log_slope == doctest::Approx(1.0).epsilon(0.1));
  auto v = solve_value_1d(m, identity(), 0.0);
  const auto l = sided_derivatives(*v.grid, v.v, v.x_star, v.x_star, Side::left);
  const double limit = 0.5 * (v.x_star * l.d2 + l.d1);
  const double e1 = 0.005;
  const double d1 = discriminant(v, KernelSpec::centered(e1, DiscreteDistribution::two_point_mean(0.5)));
  const double d2 = discriminant(v, KernelSpec::centered(2 * e1, DiscreteDistribution::two_point_mean(0.5)));
  CHECK((2 * d1 / e1 - d2 / (2 * e1)) == doctest::Approx(limit).epsilon(1e-3));
}

TEST_CASE("centered kernel: second order and direction flips at half the effort bound") {
  const Model m = baseline();
  auto sc = discriminant_scaling(m, DiscreteDistribution::two_point(), {0.02, 0.04, 0.08});
  CHECK(std::abs(sc.log_slope - 2.0) < 0.2);

  auto v = solve_value_1d(m, identity(), 0.0);
  const auto reg = regularity_check(v, m);
  const double e = 0.005;
  const double a1 = discriminant(v, KernelSpec::centered(e, DiscreteDistribution::two_point())) / (e * e);
  const double a2 = discriminant(v, KernelSpec::centered(2 * e, DiscreteDistribution::two_point())) / (4 * e * e);
  CHECK((2 * a1 - a2) == doctest::Approx(0.25 * (reg.j_left + reg.j_right)).epsilon(1e-2));

  for (double e_max : {1.0, 0.4}) {
    const Model mm = m.with_e_max(e_max);
    const double threshold = flip_threshold(mm);
    auto rep = lambda_sensitivity(mm, KernelSpec::centered(0.05, DiscreteDistribution::two_point()), 1e-3);
    CHECK(rep.resolved);
    CHECK(rep.agree);
    CHECK(sign_of(rep.slope_at_zero) == (rep.x_stars.front() > threshold ? 1 : -1));
  }
}

TEST_CASE("centered-kernel flip threshold formula") {
  CHECK(flip_threshold(baseline()) == doctest::Approx(0.5));
  CHECK(flip_threshold(Model(BioParams{1.0, 1.0}, EconParams{2.0, 1.0, 1.0, 0.05, 2.0})) == doctest::Approx(0.0));
  CHECK(flip_threshold(baseline().with_e_max(1e-9)) == doctest::Approx(1.0));
}

TEST_CASE("critical value increases with the growth rate") {
  auto rep = growth_sensitivity(baseline(), {0.8, 1.0, 1.2});
  CHECK(rep.increasing);
  auto c0 = growth_sensitivity(costless(), {0.5, 1.0, 1.5});
  CHECK(c0.increasing);
  for (std::size_t k = 0; k < c0.r.size(); ++k) CHECK(std::abs(c0.x_star[k] - 0.5 * (1 - 0.05 / c0.r[k])) < 1e-6);
  auto slow = growth_sensitivity(costless().with_discount(1e-4), {1.0});
  CHECK(slow.x_star[0] < 0.5);
  CHECK(slow.x_star[0] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("sigma1 closed forms") {
  const Model m = baseline();
  CHECK(sigma1(0.5, 1.0, m) == 0.0);
  CHECK(sigma1(1.0, 1.0, m) == doctest::Approx(0.05));
  CHECK(sigma1(0.8, 2.0, m) == doctest::Approx(0.5 * sigma1(0.8, 1.0, m)));
  CHECK_THROWS_AS(sigma1(0.0, 1.0, m), std::domain_error);
}

TEST_CASE("dual-update regularity along the critical curve") {
  GridSpec spec;
  spec.n = 2501;
  spec.n_r = 41;
  spec.r_lo_frac = 0.8;
  spec.r_hi_frac = 1.2;
  auto rep = dual_regularity_check(baseline(), spec);
  REQUIRE(rep.rows.size() > 10);
  CHECK(rep.all_ok());
  for (const auto& row : rep.rows) {
    CHECK(row.ratio_error() < 0.1);
    CHECK(row.smooth_fit_error < 0.05);
    CHECK(row.x_star_slope > 0.0);
  }
}

TEST_CASE("dual-update sensitivity table") {
  DualSensitivitySettings st;
  st.grid.n = 1501;
  st.grid.n_r = 21;
  auto rows = dual_sensitivity_table(baseline(), st);
  REQUIRE(rows.size() == 12);
  for (const auto& row : rows) {
    CHECK(row.status != "FAIL");
    CHECK(row.slope_sign != 0);
    CHECK(row.slope_sign == row.discriminant_sign);
  }
  // Centered kernels: both channels follow sign(e_max - 2E).
  for (const auto& row : rows) {
    if (row.kernel_mean != 0.0) continue;
    CHECK(row.slope_sign == (row.e_max > 2 * row.singular_effort ? 1 : -1));
  }
}
