#include <chrono>
#include <cmath>

#include "doctest.h"
#include "harvest/error.hpp"
#include "harvest/simulator.hpp"
#include "harvest/solver.hpp"

using namespace harvest;

namespace {

Model baseline() { return Model(BioParams{1.0, 1.0}, EconParams{2.0, 1.0, 1.0, 0.05, 1.0}); }
Model costless() { return Model(BioParams{1.0, 1.0}, EconParams{2.0, 1.0, 0.0, 0.05, 1.0}); }
KernelSpec identity() { return KernelSpec::uniform(1.0, 1.0); }

/// Positive root of (delta - r + 2 r x)(p x - c) - c r (1 - x) = 0, the
/// critical-value condition for logistic growth with K = 1, q = 1.
double quadratic_oracle(double p, double c, double r, double delta) {
  const double a = 2 * r * p;
  const double b = p * (delta - r) - 2 * r * c + c * r;
  const double cc = -c * (delta - r) - c * r;
  return (-b + std::sqrt(b * b - 4 * a * cc)) / (2 * a);
}

}  // namespace

TEST_CASE("closed-form threshold without effort cost") {
  const auto t0 = std::chrono::steady_clock::now();
  auto v = solve_value_1d(costless(), identity(), 0.0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(std::abs(v.x_star - 0.475) < 1e-6);
  CHECK(secs < 10.0);
  CHECK(v.residual < 1e-8);
}

TEST_CASE("threshold matches the quadratic root") {
  const double oracle = quadratic_oracle(2.0, 1.0, 1.0, 0.05);
  CHECK(oracle == doctest::Approx((2.9 + std::sqrt(2.9 * 2.9 + 0.8)) / 8.0).epsilon(1e-14));
  auto v = solve_value_1d(baseline(), identity(), 0.0);
  CHECK(std::abs(v.x_star - oracle) < 1e-6);
  const auto cv = critical_value_1d(v, baseline(), identity(), 0.0);
  CHECK_FALSE(cv.ambiguous());
  CHECK(std::abs(cv.x_star - oracle) < 1e-6);
  CHECK(cv.cells_apart < 1.0);
  for (double r : {0.8, 1.2}) {
    auto vr = solve_value_1d(baseline().with_growth_rate(r), identity(), 0.0);
    CHECK(std::abs(vr.x_star - quadratic_oracle(2.0, 1.0, r, 0.05)) < 1e-6);
  }
}

TEST_CASE("value on the singular arc and monotonicity") {
  const Model m = baseline();
  auto v = solve_value_1d(m, identity(), 0.0);
  const double xs = v.x_star;
  CHECK(v.function()(xs) == doctest::Approx(m.l0(xs) * m.singular_effort(xs) / 0.05).epsilon(1e-8));
  for (std::size_t i = 1; i < v.v.size(); ++i) CHECK(v.v[i] >= v.v[i - 1]);
}

TEST_CASE("fixed-point defect and contraction with jumps") {
  const Model m = baseline();
  const double lambda = 0.1;
  for (const auto& k : {KernelSpec::uniform(0.8, 1.2), KernelSpec::centered(0.05, DiscreteDistribution::two_point())}) {
    auto v = solve_value_1d(m, k, lambda);
    CHECK(v.residual < 1e-8);
    CHECK(contraction_factor(v.gaps) <= lambda / (0.05 + lambda) + 0.05);
    CHECK(v.max_clamped_mass <= 1e-3);
    for (std::size_t i = 1; i < v.v.size(); ++i) CHECK(v.v[i] >= v.v[i - 1]);
    const auto cv = critical_value_1d(v, m, k, lambda);
    CHECK_FALSE(cv.ambiguous());
    CHECK(std::abs(cv.x_star - v.x_star) < 1e-6);
  }
}

TEST_CASE("identity kernel leaves the threshold unchanged") {
  auto v0 = solve_value_1d(baseline(), identity(), 0.0);
  auto v1 = solve_value_1d(baseline(), identity(), 0.3);
  CHECK(std::abs(v1.x_star - v0.x_star) < 1e-7);
  for (std::size_t i = 0; i < v0.v.size(); i += 50) CHECK(v1.v[i] == doctest::Approx(v0.v[i]).epsilon(1e-8));
}

TEST_CASE("dp operator on zero input is the jump-free problem at a higher discount") {
  const Model m = baseline();
  const double lambda = 0.2;
  const auto k = KernelSpec::uniform(0.8, 1.2);
  ValueGrid zero;
  zero.grid = std::make_shared<const Grid1D>(make_biomass_grid(m, &k, {}));
  zero.v.assign(zero.grid->size(), 0.0);
  auto once = dp_operator(zero, m, k, lambda);
  GridSpec spec;
  spec.x_max = zero.grid->hi();
  auto ref = solve_value_1d(m.with_discount(0.05 + lambda), identity(), 0.0, spec);
  CHECK(once.x_star == doctest::Approx(ref.x_star).epsilon(1e-12));
  for (std::size_t i = 0; i < once.v.size(); i += 25) CHECK(once.v[i] == doctest::Approx(ref.v[i]).epsilon(1e-12));
}

TEST_CASE("solver errors") {
  SolverOptions few;
  few.max_iter = 2;
  CHECK_THROWS_AS(solve_value_1d(baseline(), KernelSpec::uniform(0.8, 1.2), 0.1, {}, few), ConvergenceError);
  GridSpec narrow;
  narrow.x_max = 1.0;
  CHECK_THROWS_AS(solve_value_1d(baseline(), KernelSpec::uniform(0.8, 1.2), 0.1, narrow), ClampOverflowError);
  CHECK_THROWS_AS(solve_value_1d(baseline(), identity(), -1.0), std::invalid_argument);
  // Break-even biomass 0.9 puts the singular effort above e_max.
  const Model tight(BioParams{1.0, 1.0}, EconParams{2.0, 1.0, 1.8, 0.05, 0.01});
  CHECK_THROWS_AS(solve_value_1d(tight, identity(), 0.0), CriticalValueError);
}

TEST_CASE("policy synthesis") {
  auto p = policy_from_value(0.475, costless());
  CHECK(p.singular_admissible);
  CHECK(p.effort(costless(), 0.475, 1.0) == doctest::Approx(0.525));
  CHECK(p.effort(costless(), 0.3, 1.0) == 0.0);
  CHECK(p.effort(costless(), 0.6, 1.0) == 1.0);
  CHECK_THROWS_AS(policy_from_value(1.2, costless()), CriticalValueError);
  auto narrow = policy_from_value(0.475, Model(BioParams{}, EconParams{2.0, 1.0, 0.0, 0.05, 0.5}));
  CHECK_FALSE(narrow.singular_admissible);
}

TEST_CASE("two-dimensional solve without growth jumps reproduces the slices") {
  GridSpec spec;
  spec.n_r = 11;
  const Model m = costless();
  auto v2 = solve_value_2d(m, {}, {}, spec);
  CHECK(v2.residual < 1e-8);
  for (std::size_t j = 0; j < v2.r_nodes.size(); ++j) {
    const double r = v2.r_nodes[j];
    CHECK(std::abs(v2.x_star[j] - 0.5 * (1.0 - 0.05 / r)) < 1e-6);
    for (std::size_t i = 1; i < v2.v[j].size(); ++i) CHECK(v2.v[j][i] >= v2.v[j][i - 1]);
  }
  const std::size_t mid = 5;
  auto v1 = solve_value_1d(m.with_growth_rate(v2.r_nodes[mid]), identity(), 0.0, spec);
  for (std::size_t i = 0; i < v1.v.size(); i += 40) CHECK(v2.v[mid][i] == doctest::Approx(v1.v[i]).epsilon(1e-12));

  Kernels2D kx{KernelSpec::uniform(0.8, 1.2), std::nullopt};
  auto a = solve_value_2d(m, kx, {0.1, 0.0}, spec);
  auto b = solve_value_1d(m.with_growth_rate(v2.r_nodes[mid]), *kx.biomass, 0.1, spec);
  CHECK(a.x_star[mid] == doctest::Approx(b.x_star).epsilon(1e-10));

  const ValueSurface surf(v2);
  CHECK(surf((*v2.grid)[300], v2.r_nodes[3]) == doctest::Approx(v2.v[3][300]).epsilon(1e-13));
}

TEST_CASE("two-dimensional solve with both jump kinds") {
  GridSpec spec;
  spec.n = 1001;
  spec.n_r = 21;
  Kernels2D k{KernelSpec::uniform(0.8, 1.2), KernelSpec::growth(0.2, DiscreteDistribution::two_point())};
  const JumpRates rates{0.1, 0.1};
  auto v = solve_value_2d(baseline(), k, rates, spec);
  CHECK(v.residual < 1e-8);
  CHECK(contraction_factor(v.gaps) <= rates.total() / (0.05 + rates.total()) + 0.05);
  const auto curve = critical_value_2d(v, baseline(), k);
  for (std::size_t j = 2; j + 2 < v.r_nodes.size(); ++j) {
    CHECK(curve.n_roots[j] == 1);
    CHECK(std::abs(curve.x_star[j] - v.x_star[j]) < 1e-5);
  }
  for (std::size_t j = 1; j < v.x_star.size(); ++j) CHECK(v.x_star[j] > v.x_star[j - 1]);
}

TEST_CASE("monte carlo agrees with the solved value") {
  const Model m = baseline();
  const double lambda = 0.1;
  const auto k = KernelSpec::uniform(0.8, 1.2);
  auto v = solve_value_1d(m, k, lambda);
  GridSpec coarse;
  coarse.n = 1001;
  auto vc = solve_value_1d(m, k, lambda, coarse);
  const double x0 = 0.5;
  const double grid_tol = std::abs(v.function()(x0) - vc.function()(x0));

  SimulationSetup s{m, {lambda, 0.0}};
  s.kernel_x = k;
  s.policy = policy_from_value(v.x_star, m);
  s.horizon = default_horizon(m);
  s.flow.x_max = v.grid->hi();
  s.flow.record = false;
  auto est = monte_carlo_value(s, x0, 1.0, 1000, 20240611);
  CHECK(std::abs(est.mean - v.function()(x0)) <= est.half_width + est.truncation_bound + 2 * grid_tol);
}
