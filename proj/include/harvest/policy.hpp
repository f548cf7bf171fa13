#pragma once

#include <limits>
#include <vector>

#include "harvest/flow.hpp"
#include "harvest/model.hpp"

namespace harvest {

/// Three-branch feedback effort: 0 below the critical biomass, the singular
/// effort G/h0 on it and e_max above it. The 2-D form carries one threshold per
/// growth-rate node and interpolates linearly in between.
struct ThresholdPolicy {
  double x_star = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> r_nodes;
  std::vector<double> x_star_curve;
  double e_max = 0.0;
  /// False when G/h0 at the threshold exceeds e_max somewhere; the flow is then
  /// bang-bang at the threshold.
  bool singular_admissible = true;

  bool is_curve() const noexcept { return !x_star_curve.empty(); }
  double threshold(double r) const;
  double effort(const Model& model, double x, double r) const;
  double effort(const Model& model, double x) const { return effort(model, x, model.bio().r); }
  FlowPolicy flow_policy(double r) const { return FlowPolicy::threshold(threshold(r), true); }
};

}  // namespace harvest
