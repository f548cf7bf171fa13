#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace harvest {

inline constexpr double kNoBreak = std::numeric_limits<double>::quiet_NaN();

/// Grid that is uniform in the graded coordinate u(x) = x + a ln x.
///
/// a == 0 gives a plain uniform grid. For a > 0 spacing is geometric well
/// below a and nearly uniform well above it, which resolves the x^gamma
/// behaviour of value functions at small biomass without wasting nodes near
/// the threshold.
class Grid1D {
 public:
  Grid1D(double lo, double hi, std::size_t n, double grading = 0.0);

  std::size_t size() const noexcept { return x_.size(); }
  double operator[](std::size_t i) const noexcept { return x_[i]; }
  std::span<const double> nodes() const noexcept { return x_; }
  double lo() const noexcept { return x_.front(); }
  double hi() const noexcept { return x_.back(); }
  double grading() const noexcept { return a_; }
  double du() const noexcept { return du_; }

  double to_u(double x) const;
  double from_u(double u) const;
  double dx_du(double x) const noexcept { return a_ == 0.0 ? 1.0 : x / (x + a_); }
  double d2x_du2(double x) const noexcept;
  double d3x_du3(double x) const noexcept;

  /// Local node spacing dx/du * du.
  double spacing(double x) const noexcept { return dx_du(x) * du_; }
  /// x at the u-midpoint of interval [i, i+1].
  double midpoint(std::size_t i) const noexcept { return mid_[i]; }

  /// Interval index i (x in [x_i, x_{i+1}]) and fractional position t in u.
  std::pair<std::size_t, double> locate(double x) const;
  std::size_t nearest(double x) const;
  /// Largest i with x_i < x (or npos when x <= lo).
  std::size_t last_below(double x) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  double a_;
  double u0_;
  double du_;
  std::vector<double> x_;
  std::vector<double> mid_;
};

using GridPtr = std::shared_ptr<const Grid1D>;

/// Finite-difference weights for derivatives 0..max_order of the polynomial
/// through (nodes, .) evaluated at z. Result is indexed [order][node].
std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> nodes,
                                                  int max_order);

/// First and second x-derivatives on every node.
struct NodeDerivatives {
  std::vector<double> d1;
  std::vector<double> d2;
};

/// Five-point (fourth-order) stencils in the graded coordinate, shifted
/// off-centre at the grid ends. When break_x is set, no stencil straddles it:
/// nodes left of the break only see nodes at or left of it and vice versa.
NodeDerivatives node_derivatives(const Grid1D& grid, std::span<const double> f,
                                 double break_x = kNoBreak);

enum class Side { left, right };

struct LocalDerivs {
  double f = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

/// Derivatives at x of the polynomial through n_points nodes lying strictly on
/// one side of break_x, skipping nodes closer than offset_cells local cells to
/// the break. Evaluates the smooth extension of that side at x.
LocalDerivs sided_derivatives(const Grid1D& grid, std::span<const double> f, double x,
                              double break_x, Side side, std::size_t n_points = 6,
                              double offset_cells = 1.0);

enum class Tail { clamp, power_law };

/// Piecewise-cubic Hermite interpolant on a Grid1D, built in the graded
/// coordinate. Above the grid the last value is held; below it either the first
/// value is held or a power law matching the boundary log-slope is used.
class GriddedFunction {
 public:
  GriddedFunction(GridPtr grid, std::vector<double> values, double break_x = kNoBreak,
                  Tail lower = Tail::clamp, Tail upper = Tail::clamp);
  /// With explicit dV/dx slopes at the nodes.
  GriddedFunction(GridPtr grid, std::vector<double> values, std::vector<double> slopes,
                  Tail lower = Tail::clamp, Tail upper = Tail::clamp);

  double operator()(double x) const;
  double derivative(double x) const;

  const Grid1D& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double> slopes() const;
  double lo() const noexcept { return grid_->lo(); }
  double hi() const noexcept { return grid_->hi(); }
  Tail lower_tail() const noexcept { return lower_; }
  Tail upper_tail() const noexcept { return upper_; }

 private:
  void finish();
  double tail_value(double x, bool below) const;
  double tail_derivative(double x, bool below) const;

  GridPtr grid_;
  std::vector<double> values_;
  std::vector<double> slopes_u_;  // dV/du
  Tail lower_;
  Tail upper_;
  double gamma_lo_ = 0.0;
  double gamma_hi_ = 0.0;
};

}  // namespace harvest
