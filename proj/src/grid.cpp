#include "harvest/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace harvest {

Grid1D::Grid1D(double lo, double hi, std::size_t n, double grading) : a_(grading) {
  if (n < 2) throw std::invalid_argument("grid needs at least two nodes");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("grid needs finite lo < hi");
  }
  if (!(a_ >= 0.0) || !std::isfinite(a_)) throw std::invalid_argument("grading must be >= 0");
  if (a_ > 0.0 && !(lo > 0.0)) throw std::invalid_argument("graded grid needs lo > 0");

  x_.resize(n);
  x_.front() = lo;
  x_.back() = hi;
  u0_ = to_u(lo);
  du_ = (to_u(hi) - u0_) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i + 1 < n; ++i) x_[i] = from_u(u0_ + du_ * static_cast<double>(i));
  mid_.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    mid_[i] = from_u(u0_ + du_ * (static_cast<double>(i) + 0.5));
  }
}

double Grid1D::to_u(double x) const {
  if (a_ == 0.0) return x;
  return x + a_ * std::log(x);
}

double Grid1D::from_u(double u) const {
  if (a_ == 0.0) return u;
  // x + a ln x is increasing; bracket then safeguarded Newton.
  double xl = x_.front() > 0.0 ? x_.front() : 1e-300;
  double xh = x_.back() > xl ? x_.back() : xl * 2.0;
  while (to_u(xl) > u) xl *= 0.5;
  while (to_u(xh) < u) xh *= 2.0;
  double x = std::clamp(u, xl, xh);
  for (int it = 0; it < 100; ++it) {
    const double f = to_u(x) - u;
    if (f == 0.0) return x;
    if (f > 0.0) {
      xh = x;
    } else {
      xl = x;
    }
    double next = x - f / (1.0 + a_ / x);
    if (!(next > xl && next < xh)) next = 0.5 * (xl + xh);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

double Grid1D::d2x_du2(double x) const noexcept {
  if (a_ == 0.0) return 0.0;
  const double s = x + a_;
  return a_ * x / (s * s * s);
}

double Grid1D::d3x_du3(double x) const noexcept {
  if (a_ == 0.0) return 0.0;
  const double s = x + a_;
  const double s2 = s * s;
  return a_ * x * (a_ - 2.0 * x) / (s2 * s2 * s);
}

std::pair<std::size_t, double> Grid1D::locate(double x) const {
  const double k = (to_u(x) - u0_) / du_;
  const double last = static_cast<double>(x_.size() - 2);
  double fl = std::floor(k);
  if (fl < 0.0) fl = 0.0;
  if (fl > last) fl = last;
  return {static_cast<std::size_t>(fl), k - fl};
}

std::size_t Grid1D::nearest(double x) const {
  if (x <= lo()) return 0;
  if (x >= hi()) return size() - 1;
  auto [i, t] = locate(x);
  return t < 0.5 ? i : i + 1;
}

std::size_t Grid1D::last_below(double x) const {
  auto it = std::lower_bound(x_.begin(), x_.end(), x);
  if (it == x_.begin()) return npos;
  return static_cast<std::size_t>(it - x_.begin()) - 1;
}

std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> nodes,
                                                  int max_order) {
  const std::size_t n = nodes.size();
  if (n == 0) throw std::invalid_argument("fornberg_weights: empty stencil");
  const auto m = static_cast<std::size_t>(max_order);
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
      }
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

namespace {

constexpr std::size_t kStencil = 5;

// Weights for d/du and d2/du2 at stencil position p of {0,..,4}, unit spacing.
struct UniformTable {
  std::array<std::array<double, kStencil>, kStencil> d1{};
  std::array<std::array<double, kStencil>, kStencil> d2{};
  UniformTable() {
    const std::array<double, kStencil> pts{0.0, 1.0, 2.0, 3.0, 4.0};
    for (std::size_t p = 0; p < kStencil; ++p) {
      auto w = fornberg_weights(static_cast<double>(p), pts, 2);
      for (std::size_t j = 0; j < kStencil; ++j) {
        d1[p][j] = w[1][j];
        d2[p][j] = w[2][j];
      }
    }
  }
};

const UniformTable& uniform_table() {
  static const UniformTable table;
  return table;
}

// Index range [first, last] a node's stencil may use.
std::pair<std::size_t, std::size_t> allowed_range(const Grid1D& grid, std::size_t i,
                                                  double break_x) {
  const std::size_t n = grid.size();
  if (std::isnan(break_x)) return {0, n - 1};
  const double tol = 1e-13 * std::max(1.0, std::abs(break_x));
  // Nodes within tol of the break belong to both sides.
  std::size_t last_left = 0;
  bool has_left = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (grid[k] <= break_x + tol) {
      last_left = k;
      has_left = true;
    } else {
      break;
    }
  }
  std::size_t first_right = has_left ? last_left + 1 : 0;
  if (has_left && std::abs(grid[last_left] - break_x) <= tol) first_right = last_left;
  if (grid[i] <= break_x + tol) return {0, has_left ? last_left : 0};
  return {std::min(first_right, n - 1), n - 1};
}

}  // namespace

NodeDerivatives node_derivatives(const Grid1D& grid, std::span<const double> f, double break_x) {
  const std::size_t n = grid.size();
  if (f.size() != n) throw std::invalid_argument("node_derivatives: size mismatch");
  NodeDerivatives out{std::vector<double>(n), std::vector<double>(n)};
  const auto& tab = uniform_table();
  const double du = grid.du();
  for (std::size_t i = 0; i < n; ++i) {
    auto [first, last] = allowed_range(grid, i, break_x);
    const std::size_t avail = last - first + 1;
    double fu = 0.0;
    double fuu = 0.0;
    if (avail >= kStencil) {
      std::size_t start = i >= first + 2 ? i - 2 : first;
      if (start + kStencil - 1 > last) start = last + 1 - kStencil;
      const std::size_t p = i - start;
      for (std::size_t j = 0; j < kStencil; ++j) {
        fu += tab.d1[p][j] * f[start + j];
        fuu += tab.d2[p][j] * f[start + j];
      }
      fu /= du;
      fuu /= du * du;
    } else if (avail >= 2) {
      std::vector<double> pts(avail);
      for (std::size_t j = 0; j < avail; ++j) pts[j] = static_cast<double>(first + j);
      auto w = fornberg_weights(static_cast<double>(i), pts, 2);
      for (std::size_t j = 0; j < avail; ++j) {
        fu += w[1][j] * f[first + j];
        fuu += w[2][j] * f[first + j];
      }
      fu /= du;
      fuu /= du * du;
    }
    const double xi = grid[i];
    const double xu = grid.dx_du(xi);
    const double fx = fu / xu;
    out.d1[i] = fx;
    out.d2[i] = (fuu - fx * grid.d2x_du2(xi)) / (xu * xu);
  }
  return out;
}

LocalDerivs sided_derivatives(const Grid1D& grid, std::span<const double> f, double x,
                              double break_x, Side side, std::size_t n_points,
                              double offset_cells) {
  const std::size_t n = grid.size();
  if (f.size() != n) throw std::invalid_argument("sided_derivatives: size mismatch");
  if (n_points < 2) throw std::invalid_argument("sided_derivatives: need >= 2 points");
  const double gap = offset_cells * grid.spacing(break_x);
  std::size_t first = 0;
  std::size_t last = n - 1;
  if (side == Side::left) {
    const std::size_t k = grid.last_below(break_x - gap);
    if (k == Grid1D::npos) throw std::domain_error("sided_derivatives: no nodes left of break");
    last = k;
  } else {
    auto nodes = grid.nodes();
    auto it = std::upper_bound(nodes.begin(), nodes.end(), break_x + gap);
    if (it == nodes.end()) throw std::domain_error("sided_derivatives: no nodes right of break");
    first = static_cast<std::size_t>(it - nodes.begin());
  }
  if (last + 1 < first + n_points) {
    throw std::domain_error("sided_derivatives: break too close to the grid edge");
  }
  std::size_t centre = grid.nearest(x);
  std::size_t start = centre >= n_points / 2 ? centre - n_points / 2 : 0;
  start = std::clamp(start, first, last + 1 - n_points);

  std::vector<double> pts(n_points);
  for (std::size_t j = 0; j < n_points; ++j) pts[j] = grid.to_u(grid[start + j]);
  const auto w = fornberg_weights(grid.to_u(x), pts, 3);
  double fu[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t j = 0; j < n_points; ++j) fu[k] += w[k][j] * f[start + j];
  }
  const double xu = grid.dx_du(x);
  const double xuu = grid.d2x_du2(x);
  const double xuuu = grid.d3x_du3(x);
  LocalDerivs d;
  d.f = fu[0];
  d.d1 = fu[1] / xu;
  d.d2 = (fu[2] - d.d1 * xuu) / (xu * xu);
  d.d3 = (fu[3] - 3.0 * d.d2 * xu * xuu - d.d1 * xuuu) / (xu * xu * xu);
  return d;
}

GriddedFunction::GriddedFunction(GridPtr grid, std::vector<double> values, double break_x,
                                 Tail lower, Tail upper)
    : grid_(std::move(grid)), values_(std::move(values)), lower_(lower), upper_(upper) {
  if (!grid_) throw std::invalid_argument("GriddedFunction: null grid");
  if (values_.size() != grid_->size()) throw std::invalid_argument("GriddedFunction: size mismatch");
  const auto d = node_derivatives(*grid_, values_, break_x);
  slopes_u_.resize(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    slopes_u_[i] = d.d1[i] * grid_->dx_du((*grid_)[i]);
  }
  finish();
}

GriddedFunction::GriddedFunction(GridPtr grid, std::vector<double> values,
                                 std::vector<double> slopes, Tail lower, Tail upper)
    : grid_(std::move(grid)), values_(std::move(values)), lower_(lower), upper_(upper) {
  if (!grid_) throw std::invalid_argument("GriddedFunction: null grid");
  if (values_.size() != grid_->size() || slopes.size() != grid_->size()) {
    throw std::invalid_argument("GriddedFunction: size mismatch");
  }
  slopes_u_.resize(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    slopes_u_[i] = slopes[i] * grid_->dx_du((*grid_)[i]);
  }
  finish();
}

void GriddedFunction::finish() {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || !std::isfinite(slopes_u_[i])) {
      throw std::invalid_argument("GriddedFunction: non-finite value");
    }
  }
  auto log_slope = [&](std::size_t i) {
    const double x = (*grid_)[i];
    const double v = values_[i];
    if (!(v > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return x * (slopes_u_[i] / grid_->dx_du(x)) / v;
  };
  gamma_lo_ = log_slope(0);
  gamma_hi_ = log_slope(values_.size() - 1);
}

double GriddedFunction::tail_value(double x, bool below) const {
  const std::size_t i = below ? 0 : values_.size() - 1;
  const Tail tail = below ? lower_ : upper_;
  const double gamma = below ? gamma_lo_ : gamma_hi_;
  if (tail == Tail::power_law && std::isfinite(gamma) && x > 0.0) {
    return values_[i] * std::pow(x / (*grid_)[i], gamma);
  }
  return values_[i];
}

double GriddedFunction::tail_derivative(double x, bool below) const {
  const Tail tail = below ? lower_ : upper_;
  const double gamma = below ? gamma_lo_ : gamma_hi_;
  if (tail == Tail::power_law && std::isfinite(gamma) && x > 0.0) {
    return gamma * tail_value(x, below) / x;
  }
  return 0.0;
}

double GriddedFunction::operator()(double x) const {
  if (x < grid_->lo()) return tail_value(x, true);
  if (x > grid_->hi()) return tail_value(x, false);
  auto [i, t] = grid_->locate(x);
  const double h = grid_->du();
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * values_[i] + (t3 - 2.0 * t2 + t) * h * slopes_u_[i] +
         (-2.0 * t3 + 3.0 * t2) * values_[i + 1] + (t3 - t2) * h * slopes_u_[i + 1];
}

double GriddedFunction::derivative(double x) const {
  if (x < grid_->lo()) return tail_derivative(x, true);
  if (x > grid_->hi()) return tail_derivative(x, false);
  auto [i, t] = grid_->locate(x);
  const double h = grid_->du();
  const double t2 = t * t;
  const double du = ((6.0 * t2 - 6.0 * t) * values_[i] + (3.0 * t2 - 4.0 * t + 1.0) * h * slopes_u_[i] +
                     (-6.0 * t2 + 6.0 * t) * values_[i + 1] + (3.0 * t2 - 2.0 * t) * h * slopes_u_[i + 1]) /
                    h;
  return du / grid_->dx_du(x);
}

std::vector<double> GriddedFunction::slopes() const {
  std::vector<double> s(values_.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = slopes_u_[i] / grid_->dx_du((*grid_)[i]);
  return s;
}

}  // namespace harvest
