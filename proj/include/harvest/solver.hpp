#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "harvest/grid.hpp"
#include "harvest/kernels.hpp"
#include "harvest/model.hpp"
#include "harvest/policy.hpp"

namespace harvest {

struct GridSpec {
  std::size_t n = 2001;
  double x_min_frac = 1e-4;  ///< x_min = x_min_frac * K
  /// Absolute x_max; 0 picks max(z_hi, 1 + epsilon) * K * 1.05 from the biomass kernel.
  double x_max = 0.0;
  /// Grading length a = grading_frac * K of the coordinate u = x + a ln x.
  double grading_frac = 0.02;
  std::size_t n_r = 101;
  double r_lo_frac = 0.5;  ///< r-grid spans [r_lo_frac, r_hi_frac] * r
  double r_hi_frac = 1.5;
};

struct SolverOptions {
  double tol = 1e-11;  ///< sup-norm gap, relative to max(1, max |V|)
  int max_iter = 5000;
  double root_tol = 1e-12;
  /// Largest tolerated clamped kernel mass at nodes x <= K.
  double clamp_fraction = 1e-3;
};

/// Biomass grid for a model and (optional) biomass kernel.
Grid1D make_biomass_grid(const Model& model, const KernelSpec* kernel, const GridSpec& spec);
std::vector<double> make_growth_grid(const Model& model, const GridSpec& spec);

struct ValueGrid {
  GridPtr grid;
  std::vector<double> v;
  std::vector<double> v_prime;
  double residual = std::numeric_limits<double>::quiet_NaN();
  double lambda = 0.0;
  /// Threshold of the last sweep (root of the Euler-Lagrange condition).
  double x_star = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> gaps;
  int iterations = 0;
  double max_clamped_mass = 0.0;

  /// Hermite interpolant with the kink at x_star kept out of the stencils.
  GriddedFunction function() const;
};

/// One application of the dynamic-programming operator: with w = lambda Q[v]
/// frozen, solves the deterministic control problem with running gain
/// l + w and discount delta + lambda.
ValueGrid dp_operator(const ValueGrid& v, const Model& model, const KernelSpec& kernel, double lambda,
                      const SolverOptions& options = {});

/// Value iteration from V = 0 to the fixed point.
ValueGrid solve_value_1d(const Model& model, const KernelSpec& kernel, double lambda,
                         const GridSpec& spec = {}, const SolverOptions& options = {});

/// Sup-norm defect of the value equation at interior nodes: the five-point
/// stencil fits on the grid and the jump support stays below x_max.
double value_defect_1d(const ValueGrid& v, const Model& model, const KernelSpec& kernel, double lambda);

/// Largest ratio of successive iterate gaps once the gap has settled, ignoring
/// gaps within `floor` of round-off.
double contraction_factor(const std::vector<double>& gaps, int burn_in = 3, double floor = 1e-12);

struct CriticalValue {
  double x_star = std::numeric_limits<double>::quiet_NaN();
  /// Every root of the ratio form on the scanned interval.
  std::vector<double> roots;
  /// Root of m - V' (switching function).
  double x_switch = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> switch_roots;
  double cells_apart = std::numeric_limits<double>::quiet_NaN();
  bool ambiguous() const noexcept { return roots.size() > 1; }
};

CriticalValue critical_value_1d(const ValueGrid& v, const Model& model, const KernelSpec& kernel,
                                double lambda, const SolverOptions& options = {});

struct ValueGrid2D {
  GridPtr grid;
  std::vector<double> r_nodes;
  /// slices[j] holds V(., r_j) on the biomass grid.
  std::vector<std::vector<double>> v;
  std::vector<std::vector<double>> v_x;
  std::vector<double> x_star;  ///< per slice
  double residual = std::numeric_limits<double>::quiet_NaN();
  JumpRates rates;
  std::vector<double> gaps;
  int iterations = 0;
  double max_clamped_mass = 0.0;
  double max_clamped_mass_r = 0.0;

  GriddedFunction slice(std::size_t j) const;
  /// V(x_i, r) at a biomass node by Hermite interpolation across slices.
  double value_at(std::size_t i, double r) const;
};

/// Smooth evaluation of a solved 2-D grid off the nodes: Hermite in x within
/// each slice, then Hermite in r with five-point r-slopes.
class ValueSurface {
 public:
  explicit ValueSurface(const ValueGrid2D& v);
  double operator()(double x, double r) const;
  const GriddedFunction& slice(std::size_t j) const { return slices_[j]; }
  std::size_t size() const noexcept { return slices_.size(); }

 private:
  std::vector<double> r_;
  std::vector<GriddedFunction> slices_;
};

/// Hermite interpolation in r through slice values f[j] at uniform r nodes.
double interpolate_in_r(const std::vector<double>& r_nodes, const std::vector<double>& f, double r);

struct Kernels2D {
  std::optional<KernelSpec> biomass;
  std::optional<KernelSpec> growth;
};

ValueGrid2D solve_value_2d(const Model& model, const Kernels2D& kernels, const JumpRates& rates,
                           const GridSpec& spec = {}, const SolverOptions& options = {});

double value_defect_2d(const ValueGrid2D& v, const Model& model, const Kernels2D& kernels);

struct CriticalCurve {
  std::vector<double> r;
  std::vector<double> x_star;
  std::vector<std::size_t> n_roots;
  std::vector<double> cells_apart;
};

/// Per-slice critical value from the ratio form with lambda.Q[V] and V_x.
CriticalCurve critical_value_2d(const ValueGrid2D& v, const Model& model, const Kernels2D& kernels,
                                const SolverOptions& options = {});

/// Three-branch policy. Throws CriticalValueError unless 0 < x* < K; flags an
/// inadmissible singular effort instead of accepting it silently.
ThresholdPolicy policy_from_value(double x_star, const Model& model);
ThresholdPolicy policy_from_value(const std::vector<double>& r_nodes, const std::vector<double>& x_star,
                                  const Model& model);

}  // namespace harvest
