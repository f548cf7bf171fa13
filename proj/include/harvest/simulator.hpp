#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "harvest/flow.hpp"
#include "harvest/kernels.hpp"
#include "harvest/model.hpp"
#include "harvest/policy.hpp"

namespace harvest {

enum class JumpKind { biomass, growth };

struct JumpEvent {
  double time = 0.0;
  JumpKind kind = JumpKind::biomass;
  double pre = 0.0;
  double post = 0.0;
  bool clamped = false;
};

struct Trajectory {
  std::vector<FlowSegment> segments;
  std::vector<JumpEvent> events;
  /// Discounted gain accumulated by the integrator along the path.
  double discounted_gain = 0.0;
  std::uint64_t seed = 0;
  double horizon = 0.0;
};

struct ValueEstimate {
  double mean = 0.0;
  double half_width = 0.0;  ///< 95% normal-approximation half-width
  double sd = 0.0;
  long n = 0;
  double truncation_bound = 0.0;
  long jumps = 0;
  long clamped_jumps = 0;
};

/// Everything a path needs besides its start state and seed.
struct SimulationSetup {
  Model model;
  JumpRates rates;
  std::optional<KernelSpec> kernel_x;
  std::optional<KernelSpec> kernel_r;
  ThresholdPolicy policy;
  /// Replaces the threshold policy when set.
  std::optional<FlowPolicy> override_policy;
  double horizon = 0.0;
  FlowOptions flow;
  double r_lo = 0.0;
  double r_hi = std::numeric_limits<double>::infinity();
  /// Largest tolerated fraction of clamped biomass draws.
  double clamp_fraction = 1e-3;
};

/// Horizon at which exp(-delta T) = 1e-8.
double default_horizon(const Model& model);
/// sup |l0| e_max exp(-delta T) / delta with the sup taken over [0, x_max].
double truncation_bound(const Model& model, double horizon, double x_max);

/// Per-replicate seed derived from the master seed by SplitMix64.
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index);

Trajectory simulate(const SimulationSetup& setup, double x0, double r0, std::uint64_t seed);

/// Trapezoid rule over the stored samples, closed form on held arcs.
double discounted_gain(const Trajectory& traj, const EconParams& econ);

ValueEstimate monte_carlo_value(const SimulationSetup& setup, double x0, double r0, long n_reps,
                                std::uint64_t seed, int threads = 1);

}  // namespace harvest
