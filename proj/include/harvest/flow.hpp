#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "harvest/model.hpp"

namespace harvest {

/// Effort rule driving the deterministic flow between jumps.
class FlowPolicy {
 public:
  enum class Kind { fixed, threshold, feedback };

  static FlowPolicy fixed(double effort);
  /// Zero effort below x_star, e_max above, singular effort once x_star is
  /// reached. With hold == false the map stays bang-bang at x_star.
  static FlowPolicy threshold(double x_star, bool hold = true);
  static FlowPolicy feedback(std::function<double(double)> effort);

  Kind kind() const noexcept { return kind_; }
  double x_star() const noexcept { return x_star_; }
  bool holds() const noexcept { return hold_; }
  /// Effort at x off the singular arc.
  double effort(const Model& model, double x) const;

 private:
  Kind kind_ = Kind::fixed;
  double effort_ = 0.0;
  double x_star_ = 0.0;
  bool hold_ = true;
  std::function<double(double)> fn_;
};

struct FlowOptions {
  double dt = 1e-3;
  double min_dt = 1e-9;
  double event_tol = 1e-10;
  double x_max = std::numeric_limits<double>::infinity();
  bool record = true;
  /// Time between stored samples; 0 stores every integrator step.
  double sample_interval = 0.0;
};

struct FlowSample {
  double t = 0.0;
  double x = 0.0;
  double effort = 0.0;
};

struct FlowSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  double x_start = 0.0;
  double x_end = 0.0;
  double r = 0.0;
  std::vector<FlowSample> samples;
  /// Time the state reached the singular arc (NaN if it never did).
  double hold_time = std::numeric_limits<double>::quiet_NaN();
  /// Integral over the segment of l0(x) e exp(-delta t), absolute time t.
  double gain = 0.0;
  long steps = 0;
};

/// Solves dX/dt = G(X; r) - h0(X) e(X) on [t0, t1] from x0 with fixed-step RK4.
FlowSegment integrate(const Model& model, double r, double x0, const FlowPolicy& policy, double t0,
                      double t1, const FlowOptions& options = {});
inline FlowSegment integrate(const Model& model, double x0, const FlowPolicy& policy, double t0,
                             double t1, const FlowOptions& options = {}) {
  return integrate(model, model.bio().r, x0, policy, t0, t1, options);
}

/// |X(t; X(s; x0, 0), s) - X(t; x0, 0)|.
double check_semigroup(const Model& model, double x0, double s, double t, const FlowPolicy& policy,
                       const FlowOptions& options = {});

}  // namespace harvest
