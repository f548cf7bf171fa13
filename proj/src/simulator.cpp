#include "harvest/simulator.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "harvest/error.hpp"

namespace harvest {

double default_horizon(const Model& model) { return std::log(1e8) / model.econ().delta; }

double truncation_bound(const Model& model, double horizon, double x_max) {
  const auto& e = model.econ();
  const double sup_l0 = std::max(e.c, std::abs(e.p * e.q * x_max - e.c));
  return sup_l0 * e.e_max * std::exp(-e.delta * horizon) / e.delta;
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Trajectory simulate(const SimulationSetup& setup, double x0, double r0, std::uint64_t seed) {
  const double horizon = setup.horizon > 0.0 ? setup.horizon : default_horizon(setup.model);
  setup.rates.validate();
  if (!(x0 > 0.0)) throw std::invalid_argument("simulate: x0 must be > 0");
  if (!(r0 > 0.0)) throw std::invalid_argument("simulate: r0 must be > 0");
  if (setup.rates.lambda_x > 0.0 && !setup.kernel_x) {
    throw std::invalid_argument("simulate: biomass jump rate set without a biomass kernel");
  }
  if (setup.rates.lambda_r > 0.0 && !setup.kernel_r) {
    throw std::invalid_argument("simulate: growth jump rate set without a growth kernel");
  }

  Trajectory traj;
  traj.seed = seed;
  traj.horizon = horizon;
  Rng rng(seed);
  const double total = setup.rates.total();
  const double p_biomass = total > 0.0 ? setup.rates.lambda_x / total : 1.0;

  double t = 0.0;
  double x = x0;
  double r = r0;
  while (t < horizon) {
    double next = horizon;
    if (total > 0.0) next = std::min(horizon, t + rng.exponential(total));
    if (next <= t) next = std::nextafter(t, horizon);
    const FlowPolicy policy = setup.override_policy ? *setup.override_policy : setup.policy.flow_policy(r);
    FlowSegment seg = integrate(setup.model, r, x, policy, t, next, setup.flow);
    traj.discounted_gain += seg.gain;
    x = seg.x_end;
    t = next;
    traj.segments.push_back(std::move(seg));
    if (t >= horizon) break;

    JumpEvent ev;
    ev.time = t;
    if (rng.uniform() < p_biomass) {
      ev.kind = JumpKind::biomass;
      ev.pre = x;
      const JumpDraw d = sample_jump(*setup.kernel_x, x, rng, setup.flow.x_max);
      ev.post = d.value;
      ev.clamped = d.clamped;
      x = d.value;
    } else {
      ev.kind = JumpKind::growth;
      ev.pre = r;
      const JumpDraw d = sample_jump(*setup.kernel_r, r, rng, setup.r_hi);
      ev.post = d.value;
      ev.clamped = d.clamped;
      if (ev.post < setup.r_lo) {
        ev.post = setup.r_lo;
        ev.clamped = true;
      }
      r = ev.post;
    }
    traj.events.push_back(ev);
  }
  return traj;
}

double discounted_gain(const Trajectory& traj, const EconParams& econ) {
  auto l0 = [&](double x) { return econ.p * econ.q * x - econ.c; };
  double total = 0.0;
  for (const auto& seg : traj.segments) {
    const auto& s = seg.samples;
    const bool held = std::isfinite(seg.hold_time);
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
      if (held && s[k].t >= seg.hold_time) break;
      const bool enters_hold = held && s[k + 1].t >= seg.hold_time;
      const double e1 = enters_hold ? s[k].effort : s[k + 1].effort;
      const double f0 = l0(s[k].x) * s[k].effort * std::exp(-econ.delta * s[k].t);
      const double f1 = l0(s[k + 1].x) * e1 * std::exp(-econ.delta * s[k + 1].t);
      total += 0.5 * (s[k + 1].t - s[k].t) * (f0 + f1);
    }
    if (held && !s.empty()) {
      const auto& last = s.back();
      const double integrand = l0(last.x) * last.effort;
      total += integrand *
               (std::exp(-econ.delta * seg.hold_time) - std::exp(-econ.delta * seg.t_end)) / econ.delta;
    }
  }
  return total;
}

ValueEstimate monte_carlo_value(const SimulationSetup& setup, double x0, double r0, long n_reps,
                                std::uint64_t seed, int threads) {
  if (n_reps < 2) throw std::invalid_argument("monte_carlo_value: need at least 2 replicates");
  SimulationSetup quiet = setup;
  quiet.flow.record = false;
  if (!(quiet.horizon > 0.0)) quiet.horizon = default_horizon(setup.model);

  std::vector<double> gains(static_cast<std::size_t>(n_reps));
  std::vector<long> jumps(gains.size(), 0);
  std::vector<long> clamps(gains.size(), 0);
  auto run = [&](std::size_t i) {
    const Trajectory tr = simulate(quiet, x0, r0, replicate_seed(seed, i));
    gains[i] = tr.discounted_gain;
    for (const auto& ev : tr.events) {
      if (ev.kind != JumpKind::biomass) continue;
      ++jumps[i];
      if (ev.clamped) ++clamps[i];
    }
  };
  const int workers = std::max(1, threads);
  if (workers == 1) {
    for (std::size_t i = 0; i < gains.size(); ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = static_cast<std::size_t>(w); i < gains.size();
               i += static_cast<std::size_t>(workers)) {
            run(i);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  ValueEstimate est;
  est.n = n_reps;
  double sum = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    sum += gains[i];
    est.jumps += jumps[i];
    est.clamped_jumps += clamps[i];
  }
  est.mean = sum / static_cast<double>(n_reps);
  double ss = 0.0;
  for (double g : gains) ss += (g - est.mean) * (g - est.mean);
  est.sd = std::sqrt(ss / static_cast<double>(n_reps - 1));
  est.half_width = 1.96 * est.sd / std::sqrt(static_cast<double>(n_reps));
  const double x_max = std::isfinite(setup.flow.x_max)
                           ? setup.flow.x_max
                           : std::max(x0, setup.model.bio().K);
  est.truncation_bound = truncation_bound(setup.model, quiet.horizon, x_max);
  if (est.jumps > 0 &&
      static_cast<double>(est.clamped_jumps) > setup.clamp_fraction * static_cast<double>(est.jumps)) {
    throw ClampOverflowError("monte_carlo_value: too many biomass jumps clamped at x_max");
  }
  return est;
}

}  // namespace harvest
