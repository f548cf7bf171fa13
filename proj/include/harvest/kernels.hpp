#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "harvest/grid.hpp"

namespace harvest {

/// Finite distribution of the jump variable Z (or S) on [-1, 1].
struct DiscreteDistribution {
  std::vector<double> support;
  std::vector<double> weights;
  /// Allows a distribution that is not symmetric about 0.
  bool asymmetric = false;

  static DiscreteDistribution two_point();  ///< {-1, +1} with equal weights
  /// Two-point law on {-1, +1} with the given mean, marked asymmetric unless mean == 0.
  static DiscreteDistribution two_point_mean(double mean);

  double mean() const;
  double second_moment() const;
  void validate() const;
};

enum class KernelKind { uniform, centered, growth };

/// Multiplicative jump law: the post-jump state is state * M where M takes
/// value nodes[k] with probability weights[k].
struct MultiplierRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Conditional jump distribution. Build through the named constructors, which
/// validate the parameters and precompute the quadrature rule.
class KernelSpec {
 public:
  /// Y = Z x with Z uniform on [z_lo, z_hi]. z_lo == z_hi is the identity jump.
  static KernelSpec uniform(double z_lo, double z_hi, int quadrature_nodes = 64);
  /// Y = x (1 + Z epsilon).
  static KernelSpec centered(double epsilon, DiscreteDistribution h);
  /// R = r (1 + S xi).
  static KernelSpec growth(double xi, DiscreteDistribution h);

  KernelKind kind() const noexcept { return kind_; }
  double z_lo() const noexcept { return z_lo_; }
  double z_hi() const noexcept { return z_hi_; }
  double epsilon() const noexcept { return scale_; }
  double xi() const noexcept { return scale_; }
  const DiscreteDistribution& distribution() const noexcept { return h_; }
  int quadrature_nodes() const noexcept { return quadrature_nodes_; }
  const MultiplierRule& rule() const noexcept { return rule_; }

  double mean_multiplier() const;
  double max_multiplier() const;
  double min_multiplier() const;
  bool is_identity() const;

 private:
  KernelSpec() = default;

  KernelKind kind_ = KernelKind::uniform;
  double z_lo_ = 1.0;
  double z_hi_ = 1.0;
  double scale_ = 0.0;
  DiscreteDistribution h_;
  int quadrature_nodes_ = 0;
  MultiplierRule rule_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
MultiplierRule gauss_legendre(int n);

/// Q[theta](x) together with the probability mass that landed above the
/// upper limit and was clamped onto it.
struct QValue {
  double value = 0.0;
  double clamped_mass = 0.0;
};

using ScalarFn = std::function<double(double)>;

QValue apply_q(const ScalarFn& theta, const KernelSpec& spec, double x,
               double upper = std::numeric_limits<double>::infinity());
/// Uses theta's own grid top as the clamp limit.
QValue apply_q(const GriddedFunction& theta, const KernelSpec& spec, double x);

/// Q_r[theta](x, r): integrates over the growth-rate argument with x fixed.
/// Draws outside [r_lo, r_hi] are clamped onto the nearer end.
QValue apply_q_growth(const std::function<double(double, double)>& theta2, const KernelSpec& spec,
                      double x, double r, double r_lo = 0.0,
                      double r_hi = std::numeric_limits<double>::infinity());

/// Random stream used by every sampling routine.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Exponential with the given rate.
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
};

struct JumpDraw {
  double value = 0.0;
  bool clamped = false;
};

/// One draw from the jump law at `state`; values above `upper` are clamped.
JumpDraw sample_jump(const KernelSpec& spec, double state, Rng& rng,
                     double upper = std::numeric_limits<double>::infinity());

/// d/dx Q[v](x) by a five-point central difference with the local grid step.
double q_derivative(const GriddedFunction& v, const KernelSpec& spec, double x);
/// [Q[v]]'(x) - v'(x), both by the same five-point stencil.
double q_derivative_gap(const GriddedFunction& v, const KernelSpec& spec, double x);

}  // namespace harvest
