#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "doctest.h"
#include "harvest/error.hpp"
#include "harvest/flow.hpp"

using namespace harvest;

namespace {

double logistic_exact(double x0, double r, double K, double t) {
  return K / (1.0 + (K / x0 - 1.0) * std::exp(-r * t));
}

const Model& baseline() {
  static const Model m(BioParams{1.0, 1.0}, EconParams{2.0, 1.0, 1.0, 0.05, 1.0});
  return m;
}

}  // namespace

TEST_CASE("zero effort follows the logistic closed form") {
  auto seg = integrate(baseline(), 0.1, FlowPolicy::fixed(0.0), 0.0, 1.0);
  CHECK(seg.x_end == doctest::Approx(1.0 / (1.0 + 9.0 * std::exp(-1.0))).epsilon(1e-12));
  CHECK(seg.x_end == doctest::Approx(0.23197).epsilon(1e-5));
  CHECK(seg.gain == 0.0);
}

TEST_CASE("fourth-order convergence") {
  auto err = [](double dt) {
    FlowOptions o;
    o.dt = dt;
    o.record = false;
    return std::abs(integrate(baseline(), 0.05, FlowPolicy::fixed(0.0), 0.0, 4.0, o).x_end -
                    logistic_exact(0.05, 1.0, 1.0, 4.0));
  };
  const double ratio = err(0.1) / err(0.05);
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.0);
}

TEST_CASE("constant effort matches an independent adaptive integrator") {
  const double e = 0.6;
  using state = std::array<double, 2>;
  auto rhs = [&](const state& s, state& ds, double t) {
    ds[0] = s[0] * (1.0 - s[0]) - e * s[0];
    ds[1] = (2.0 * s[0] - 1.0) * e * std::exp(-0.05 * t);
  };
  state s{0.9, 0.0};
  boost::numeric::odeint::integrate_adaptive(
      boost::numeric::odeint::make_controlled<boost::numeric::odeint::runge_kutta_dopri5<state>>(1e-13, 1e-13),
      rhs, s, 0.0, 3.0, 1e-3);
  auto seg = integrate(baseline(), 0.9, FlowPolicy::fixed(e), 0.0, 3.0);
  CHECK(seg.x_end == doctest::Approx(s[0]).epsilon(1e-11));
  CHECK(seg.gain == doctest::Approx(s[1]).epsilon(1e-10));
}

TEST_CASE("maximal effort above growth gives a decreasing path") {
  auto seg = integrate(baseline(), 0.9, FlowPolicy::fixed(1.0), 0.0, 5.0);
  for (std::size_t k = 1; k < seg.samples.size(); ++k) CHECK(seg.samples[k].x < seg.samples[k - 1].x);
  for (const auto& s : seg.samples) CHECK(s.x > 0.0);
}

TEST_CASE("threshold policy reaches and holds the singular arc") {
  const double xs = 0.74185;
  auto at = integrate(baseline(), xs, FlowPolicy::threshold(xs), 0.0, 10.0);
  for (const auto& s : at.samples) CHECK(s.x == xs);
  CHECK(at.hold_time == 0.0);
  const double e_star = 1.0 - xs;
  const double closed = (2 * xs - 1) * e_star * (1 - std::exp(-0.5)) / 0.05;
  CHECK(at.gain == doctest::Approx(closed).epsilon(1e-12));

  for (double x0 : {0.2, 0.95}) {
    auto seg = integrate(baseline(), x0, FlowPolicy::threshold(xs), 0.0, 30.0);
    CHECK(std::isfinite(seg.hold_time));
    CHECK(seg.x_end == xs);
    for (std::size_t k = 1; k < seg.samples.size(); ++k) {
      const double step = seg.samples[k].x - seg.samples[k - 1].x;
      if (x0 < xs) CHECK(step >= 0.0);
      if (x0 > xs) CHECK(step <= 0.0);
    }
  }
}

TEST_CASE("crossing time is located to event tolerance") {
  // Zero effort from 0.2 reaches 0.5 at t = ln 4 on the logistic curve.
  auto seg = integrate(baseline(), 0.2, FlowPolicy::threshold(0.5), 0.0, 3.0);
  CHECK(seg.hold_time == doctest::Approx(std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("semigroup and time shift") {
  auto policy = FlowPolicy::feedback([](double x) { return 0.5 * x; });
  CHECK(check_semigroup(baseline(), 0.3, 1.7, 1.7, policy) == 0.0);
  FlowOptions o;
  o.dt = 1e-3;
  CHECK(check_semigroup(baseline(), 0.3, 1.25, 4.0, policy, o) < 1e-8);
  CHECK(check_semigroup(baseline(), 0.3, 1.2345, 4.0, policy, o) < 1e-8);
  auto a = integrate(baseline(), 0.3, policy, 0.0, 2.0, o);
  auto b = integrate(baseline(), 0.3, policy, 5.0, 7.0, o);
  CHECK(std::abs(a.x_end - b.x_end) < 1e-10);
}

TEST_CASE("flow errors") {
  CHECK_THROWS_AS(integrate(baseline(), 0.3, FlowPolicy::fixed(0.0), 1.0, 1.0), std::invalid_argument);
  FlowOptions o;
  o.x_max = 0.5;
  CHECK_THROWS_AS(integrate(baseline(), 0.45, FlowPolicy::fixed(0.0), 0.0, 5.0, o), FlowError);
  CHECK_THROWS_AS(integrate(baseline(), 0.3, FlowPolicy::fixed(2.0), 0.0, 1.0), std::invalid_argument);
}
