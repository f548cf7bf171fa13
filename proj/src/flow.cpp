#include "harvest/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "harvest/error.hpp"

namespace harvest {

FlowPolicy FlowPolicy::fixed(double effort) {
  FlowPolicy p;
  p.kind_ = Kind::fixed;
  p.effort_ = effort;
  return p;
}

FlowPolicy FlowPolicy::threshold(double x_star, bool hold) {
  if (!(x_star > 0.0) || !std::isfinite(x_star)) throw std::invalid_argument("threshold must be > 0");
  FlowPolicy p;
  p.kind_ = Kind::threshold;
  p.x_star_ = x_star;
  p.hold_ = hold;
  return p;
}

FlowPolicy FlowPolicy::feedback(std::function<double(double)> effort) {
  if (!effort) throw std::invalid_argument("feedback policy needs a callable");
  FlowPolicy p;
  p.kind_ = Kind::feedback;
  p.fn_ = std::move(effort);
  return p;
}

double FlowPolicy::effort(const Model& model, double x) const {
  switch (kind_) {
    case Kind::fixed:
      return effort_;
    case Kind::threshold:
      return x < x_star_ ? 0.0 : model.econ().e_max;
    case Kind::feedback:
      return fn_(x);
  }
  return 0.0;
}

namespace {

struct State {
  double x;
  double d;  // exp(-delta t)
  double gain;
};

class Stepper {
 public:
  Stepper(const Model& model, double r, const FlowPolicy& policy)
      : model_(model), r_(r), policy_(policy), delta_(model.econ().delta) {}

  // One RK4 step. For the threshold policy the effort is frozen to the side of
  // the step's starting point.
  State step(const State& s, double h) const {
    const bool frozen = policy_.kind() == FlowPolicy::Kind::threshold;
    const double e_frozen = frozen ? policy_.effort(model_, s.x) : 0.0;
    auto rhs = [&](double x, double d, double& dx, double& dd, double& dg) {
      const double e = frozen ? e_frozen : policy_.effort(model_, x);
      dx = model_.drift(x, e, r_);
      dd = -delta_ * d;
      dg = model_.l0(x) * e * d;
    };
    double k1x, k1d, k1g, k2x, k2d, k2g, k3x, k3d, k3g, k4x, k4d, k4g;
    rhs(s.x, s.d, k1x, k1d, k1g);
    rhs(s.x + 0.5 * h * k1x, s.d + 0.5 * h * k1d, k2x, k2d, k2g);
    rhs(s.x + 0.5 * h * k2x, s.d + 0.5 * h * k2d, k3x, k3d, k3g);
    rhs(s.x + h * k3x, s.d + h * k3d, k4x, k4d, k4g);
    return {s.x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            s.d + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
            s.gain + h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)};
  }

 private:
  const Model& model_;
  double r_;
  const FlowPolicy& policy_;
  double delta_;
};

}  // namespace

FlowSegment integrate(const Model& model, double r, double x0, const FlowPolicy& policy, double t0,
                      double t1, const FlowOptions& options) {
  if (!(options.dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
  if (!(t1 > t0)) throw std::invalid_argument("integrate: need t1 > t0");
  if (!(x0 >= 0.0 && x0 <= options.x_max)) throw std::invalid_argument("integrate: x0 outside [0, x_max]");

  FlowSegment seg;
  seg.t_start = t0;
  seg.t_end = t1;
  seg.x_start = x0;
  seg.r = r;

  const Stepper stepper(model, r, policy);
  const double delta = model.econ().delta;
  const double e_max = model.econ().e_max;
  const bool threshold = policy.kind() == FlowPolicy::Kind::threshold;
  double x_star = 0.0;
  double e_star = 0.0;
  bool can_hold = false;
  if (threshold) {
    x_star = policy.x_star();
    e_star = model.singular_effort(x_star, r);
    can_hold = policy.holds() && e_star >= 0.0 && e_star <= e_max;
  }

  State s{x0, std::exp(-delta * t0), 0.0};
  double t = t0;
  bool holding = can_hold && std::abs(x0 - x_star) <= options.event_tol;
  if (holding) s.x = x_star;

  double last_record = t0;
  auto record = [&](double time, double x, double e, bool force) {
    if (!options.record) return;
    if (force || options.sample_interval <= 0.0 ||
        time - last_record >= options.sample_interval * (1.0 - 1e-9)) {
      seg.samples.push_back({time, x, e});
      last_record = time;
    }
  };
  auto effort_at = [&](double x) { return holding ? e_star : policy.effort(model, x); };
  record(t, s.x, effort_at(s.x), true);

  while (!holding && t < t1) {
    double h = std::min(options.dt, t1 - t);
    State next = stepper.step(s, h);
    while (!std::isfinite(next.x) || !(next.x > 0.0) || !std::isfinite(next.gain)) {
      h *= 0.5;
      if (h < options.min_dt) throw FlowError("integrate: step rejected below the minimum step size");
      next = stepper.step(s, h);
    }
    ++seg.steps;
    const bool crossed = can_hold && ((s.x < x_star) != (next.x < x_star) || next.x == x_star);
    if (crossed) {
      double lo = 0.0;
      double hi = h;
      State at = next;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const State trial = stepper.step(s, mid);
        if (std::abs(trial.x - x_star) <= options.event_tol) {
          hi = mid;
          at = trial;
          break;
        }
        if ((trial.x < x_star) == (s.x < x_star)) {
          lo = mid;
        } else {
          hi = mid;
          at = trial;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, t)) break;
      }
      s = at;
      s.x = x_star;
      t += hi;
      holding = true;
      seg.hold_time = t;
      record(t, s.x, e_star, true);
      break;
    }
    s = next;
    t = (h == t1 - t) ? t1 : t + h;
    if (s.x > options.x_max) throw FlowError("integrate: biomass left [0, x_max]");
    record(t, s.x, effort_at(s.x), t >= t1);
  }

  if (holding) {
    if (std::isnan(seg.hold_time)) seg.hold_time = t;
    const double span = t1 - t;
    s.gain += model.l0(x_star) * e_star * s.d * (-std::expm1(-delta * span)) / delta;
    if (options.record) {
      const double step = options.sample_interval > 0.0 ? options.sample_interval : options.dt;
      const auto n = static_cast<long>(std::floor(span / step * (1.0 + 1e-12)));
      for (long k = 1; k <= n; ++k) {
        const double tk = t + static_cast<double>(k) * step;
        if (tk < t1) seg.samples.push_back({tk, x_star, e_star});
      }
      if (seg.samples.empty() || seg.samples.back().t < t1) seg.samples.push_back({t1, x_star, e_star});
    }
    t = t1;
  }
  seg.x_end = s.x;
  seg.gain = s.gain;
  return seg;
}

double check_semigroup(const Model& model, double x0, double s, double t, const FlowPolicy& policy,
                       const FlowOptions& options) {
  if (!(s > 0.0 && t >= s)) throw std::invalid_argument("check_semigroup: need 0 < s <= t");
  if (s == t) return 0.0;
  FlowOptions quiet = options;
  quiet.record = false;
  const double direct = integrate(model, x0, policy, 0.0, t, quiet).x_end;
  const double xs = integrate(model, x0, policy, 0.0, s, quiet).x_end;
  const double restarted = integrate(model, xs, policy, s, t, quiet).x_end;
  return std::abs(restarted - direct);
}

}  // namespace harvest
