#include "harvest/solver.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "harvest/error.hpp"

namespace harvest {

namespace {

/// All roots of f in [lo, hi]: sign changes between consecutive scan points,
/// each refined by TOMS 748.
std::vector<double> scan_roots(const std::function<double(double)>& f, std::span<const double> scan,
                               double lo, double hi, double tol) {
  std::vector<double> pts;
  for (double x : scan) {
    if (x > lo && x < hi) pts.push_back(x);
  }
  std::vector<double> roots;
  if (pts.size() < 2) return roots;
  std::vector<double> fv(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) fv[i] = f(pts[i]);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (fv[i] == 0.0) {
      roots.push_back(pts[i]);
      continue;
    }
    if (!std::isfinite(fv[i]) || !std::isfinite(fv[i + 1])) continue;
    if (fv[i + 1] == 0.0 || (fv[i] < 0.0) == (fv[i + 1] < 0.0)) continue;
    std::uintmax_t max_iter = 200;
    auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol; };
    auto [a, b] = boost::math::tools::toms748_solve(f, pts[i], pts[i + 1], fv[i], fv[i + 1], stop, max_iter);
    roots.push_back(0.5 * (a + b));
  }
  if (fv.back() == 0.0) roots.push_back(pts.back());
  return roots;
}

void check_lambda(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("jump rate must be >= 0");
}

/// Node values of a growth-direction five-point derivative on a uniform grid.
double r_slope(const std::vector<double>& f, std::size_t j, double h) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  if (n < 5) {
    if (j == 0) return (f[1] - f[0]) / h;
    if (j == n - 1) return (f[n - 1] - f[n - 2]) / h;
    return (f[j + 1] - f[j - 1]) / (2.0 * h);
  }
  std::size_t start = j >= 2 ? j - 2 : 0;
  if (start + 4 > n - 1) start = n - 5;
  static const auto table = [] {
    std::array<std::array<double, 5>, 5> t{};
    const std::array<double, 5> pts{0, 1, 2, 3, 4};
    for (std::size_t p = 0; p < 5; ++p) {
      auto w = fornberg_weights(static_cast<double>(p), pts, 1);
      for (std::size_t k = 0; k < 5; ++k) t[p][k] = w[1][k];
    }
    return t;
  }();
  const std::size_t p = j - start;
  double s = 0.0;
  for (std::size_t k = 0; k < 5; ++k) s += table[p][k] * f[start + k];
  return s / h;
}

double hermite(double f0, double f1, double s0, double s1, double h, double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * s0 + (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * h * s1;
}

struct RLocation {
  std::size_t j = 0;
  double t = 0.0;
};

RLocation locate_r(const std::vector<double>& r, double rr) {
  const double h = (r.back() - r.front()) / static_cast<double>(r.size() - 1);
  double k = (rr - r.front()) / h;
  k = std::clamp(k, 0.0, static_cast<double>(r.size() - 1));
  std::size_t j = static_cast<std::size_t>(std::floor(k));
  if (j >= r.size() - 1) j = r.size() - 2;
  return {j, k - static_cast<double>(j)};
}

/// Integrates one slice given the frozen jump term w = lambda.Q[V] on the nodes.
struct SliceSolution {
  std::vector<double> v;
  double x_star = 0.0;
};

SliceSolution solve_slice(const GridPtr& gp, const Model& model, double r, double rho,
                          const std::vector<double>& w, const SolverOptions& options) {
  const Grid1D& g = *gp;
  const std::size_t n = g.size();
  const auto& econ = model.econ();
  const double e_max = econ.e_max;
  const double K = model.bio().K;

  const GriddedFunction wf(gp, w);
  std::vector<double> w_mid(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) w_mid[i] = wf(g.midpoint(i));

  auto phi = [&](double x) {
    const auto gr = model.growth(x, r);
    const auto mg = model.margin(x);
    return (rho - gr.dg) * mg.m - mg.dm * gr.g - wf.derivative(x);
  };
  const auto roots = scan_roots(phi, g.nodes(), model.break_even_biomass(), K, options.root_tol);
  if (roots.empty()) {
    throw CriticalValueError("no sign change of the Euler-Lagrange condition on (c/(pq), K)");
  }
  const double xs = roots.front();
  const double e_star = model.singular_effort(xs, r);
  if (!(e_star >= 0.0 && e_star < e_max)) {
    throw CriticalValueError("singular effort at the critical biomass is outside [0, e_max)");
  }

  auto left = [&](double x, double wx, double v) {
    return g.dx_du(x) * (rho * v - wx) / model.growth(x, r).g;
  };
  auto right = [&](double x, double wx, double v) {
    return g.dx_du(x) * (rho * v - model.l0(x) * e_max - wx) / (model.growth(x, r).g - model.h0(x) * e_max);
  };
  auto rk4 = [](auto&& f, double v, double h, double x0, double w0, double xm, double wm, double x1, double w1) {
    const double k1 = f(x0, w0, v);
    const double k2 = f(xm, wm, v + 0.5 * h * k1);
    const double k3 = f(xm, wm, v + 0.5 * h * k2);
    const double k4 = f(x1, w1, v + h * k3);
    return v + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  SliceSolution out;
  out.x_star = xs;
  out.v.assign(n, 0.0);
  const double v_star = (model.l0(xs) * e_star + wf(xs)) / rho;
  const double u_star = g.to_u(xs);

  const std::size_t i_left = g.last_below(xs);  // last node strictly below xs
  const std::size_t i_right = i_left == Grid1D::npos ? 0 : i_left + 1;

  if (i_left != Grid1D::npos) {
    const double h = g.to_u(g[i_left]) - u_star;
    const double xm = g.from_u(u_star + 0.5 * h);
    double v = rk4(left, v_star, h, xs, wf(xs), xm, wf(xm), g[i_left], w[i_left]);
    out.v[i_left] = v;
    for (std::size_t i = i_left; i-- > 0;) {
      v = rk4(left, v, -g.du(), g[i + 1], w[i + 1], g.midpoint(i), w_mid[i], g[i], w[i]);
      out.v[i] = v;
    }
  }
  if (i_right < n) {
    double v = v_star;
    if (g[i_right] > xs) {
      const double h = g.to_u(g[i_right]) - u_star;
      const double xm = g.from_u(u_star + 0.5 * h);
      v = rk4(right, v_star, h, xs, wf(xs), xm, wf(xm), g[i_right], w[i_right]);
    }
    out.v[i_right] = v;
    for (std::size_t i = i_right; i + 1 < n; ++i) {
      v = rk4(right, v, g.du(), g[i], w[i], g.midpoint(i), w_mid[i], g[i + 1], w[i + 1]);
      out.v[i + 1] = v;
    }
  }
  return out;
}

std::vector<double> jump_term_1d(const ValueGrid& v, const Model& model, const KernelSpec& kernel,
                                 double lambda, const SolverOptions& options, double& max_mass) {
  const Grid1D& g = *v.grid;
  std::vector<double> w(g.size(), 0.0);
  max_mass = 0.0;
  if (lambda == 0.0) return w;
  const GriddedFunction f = v.function();
  const double K = model.bio().K;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const QValue q = apply_q(f, kernel, g[i]);
    w[i] = lambda * q.value;
    if (g[i] <= K) {
      max_mass = std::max(max_mass, q.clamped_mass);
      if (q.clamped_mass > options.clamp_fraction) {
        throw ClampOverflowError("kernel mass above x_max exceeds the clamp limit at x = " +
                                 std::to_string(g[i]) + "; raise x_max");
      }
    }
  }
  return w;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

Grid1D make_biomass_grid(const Model& model, const KernelSpec* kernel, const GridSpec& spec) {
  const double K = model.bio().K;
  double x_max = spec.x_max;
  if (!(x_max > 0.0)) {
    const double top = kernel ? std::max(kernel->max_multiplier(), 1.0) : 1.0;
    x_max = top * K * 1.05;
  }
  if (spec.n < 8) throw std::invalid_argument("biomass grid needs at least 8 nodes");
  return Grid1D(spec.x_min_frac * K, x_max, spec.n, spec.grading_frac * K);
}

std::vector<double> make_growth_grid(const Model& model, const GridSpec& spec) {
  if (spec.n_r < 2) throw std::invalid_argument("growth-rate grid needs at least 2 nodes");
  if (!(spec.r_lo_frac > 0.0 && spec.r_hi_frac > spec.r_lo_frac)) {
    throw std::invalid_argument("growth-rate grid needs 0 < r_lo < r_hi");
  }
  const double r0 = model.bio().r;
  std::vector<double> r(spec.n_r);
  for (std::size_t j = 0; j < spec.n_r; ++j) {
    r[j] = r0 * (spec.r_lo_frac + (spec.r_hi_frac - spec.r_lo_frac) * static_cast<double>(j) /
                                      static_cast<double>(spec.n_r - 1));
  }
  return r;
}

GriddedFunction ValueGrid::function() const {
  return GriddedFunction(grid, v, x_star, Tail::power_law, Tail::clamp);
}

ValueGrid dp_operator(const ValueGrid& v, const Model& model, const KernelSpec& kernel, double lambda,
                      const SolverOptions& options) {
  check_lambda(lambda);
  if (!v.grid || v.v.size() != v.grid->size()) throw std::invalid_argument("dp_operator: malformed grid");
  for (double x : v.v) {
    if (!std::isfinite(x)) throw std::invalid_argument("dp_operator: non-finite value");
  }
  double mass = 0.0;
  const auto w = jump_term_1d(v, model, kernel, lambda, options, mass);
  const double rho = model.econ().delta + lambda;
  auto sol = solve_slice(v.grid, model, model.bio().r, rho, w, options);
  ValueGrid out;
  out.grid = v.grid;
  out.v = std::move(sol.v);
  out.x_star = sol.x_star;
  out.lambda = lambda;
  out.max_clamped_mass = mass;
  out.v_prime = node_derivatives(*out.grid, out.v, out.x_star).d1;
  return out;
}

ValueGrid solve_value_1d(const Model& model, const KernelSpec& kernel, double lambda, const GridSpec& spec,
                         const SolverOptions& options) {
  check_lambda(lambda);
  ValueGrid cur;
  cur.grid = std::make_shared<const Grid1D>(make_biomass_grid(model, &kernel, spec));
  cur.v.assign(cur.grid->size(), 0.0);
  cur.lambda = lambda;
  std::vector<double> gaps;
  double max_mass = 0.0;
  for (int it = 1; it <= options.max_iter; ++it) {
    ValueGrid next = dp_operator(cur, model, kernel, lambda, options);
    max_mass = std::max(max_mass, next.max_clamped_mass);
    double gap = 0.0;
    for (std::size_t i = 0; i < next.v.size(); ++i) gap = std::max(gap, std::abs(next.v[i] - cur.v[i]));
    gaps.push_back(gap);
    cur = std::move(next);
    if (gap <= options.tol * std::max(1.0, max_abs(cur.v))) {
      cur.gaps = gaps;
      cur.iterations = it;
      cur.max_clamped_mass = max_mass;
      cur.residual = value_defect_1d(cur, model, kernel, lambda);
      return cur;
    }
  }
  throw ConvergenceError("value iteration did not converge in " + std::to_string(options.max_iter) +
                             " sweeps",
                         gaps);
}

double value_defect_1d(const ValueGrid& v, const Model& model, const KernelSpec& kernel, double lambda) {
  const Grid1D& g = *v.grid;
  const std::size_t n = g.size();
  const auto& econ = model.econ();
  const double rho = econ.delta + lambda;
  const auto d = node_derivatives(g, v.v, v.x_star);
  const GriddedFunction f = v.function();
  double worst = 0.0;
  const double reach = lambda > 0.0 ? kernel.max_multiplier() : 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double x = g[i];
    if (i + 4 < n && g[i + 4] * reach > g.hi()) break;
    const double w = lambda == 0.0 ? 0.0 : lambda * apply_q(f, kernel, x).value;
    const double vp = d.d1[i];
    const double res = std::max(model.l0(x) - model.h0(x) * vp, 0.0) * econ.e_max + vp * model.growth(x).g -
                       rho * v.v[i] + w;
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

double contraction_factor(const std::vector<double>& gaps, int burn_in, double floor) {
  double worst = 0.0;
  for (std::size_t k = static_cast<std::size_t>(std::max(burn_in, 1)); k < gaps.size(); ++k) {
    if (gaps[k] <= floor || gaps[k - 1] <= floor) break;
    worst = std::max(worst, gaps[k] / gaps[k - 1]);
  }
  return worst;
}

CriticalValue critical_value_1d(const ValueGrid& v, const Model& model, const KernelSpec& kernel, double lambda,
                                const SolverOptions& options) {
  check_lambda(lambda);
  const Grid1D& g = *v.grid;
  const GriddedFunction f = v.function();
  const double delta = model.econ().delta;
  const double lo = model.break_even_biomass();
  const double K = model.bio().K;

  auto stencil_v = [&](double x) {
    const double h = g.spacing(x);
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
  };
  auto ratio_form = [&](double x) {
    const auto gr = model.growth(x);
    const auto mg = model.margin(x);
    double jump = 0.0;
    if (lambda > 0.0) jump = -lambda * q_derivative_gap(f, kernel, x) / stencil_v(x);
    return (delta - gr.dg + jump) * mg.m - mg.dm * gr.g;
  };
  auto switching = [&](double x) { return model.margin(x).m - f.derivative(x); };

  CriticalValue cv;
  cv.roots = scan_roots(ratio_form, g.nodes(), lo, K, options.root_tol);
  cv.switch_roots = scan_roots(switching, g.nodes(), lo, K, options.root_tol);
  if (cv.roots.empty()) throw CriticalValueError("no interior root of the critical-value condition");
  cv.x_star = cv.roots.front();
  if (!cv.switch_roots.empty()) {
    cv.x_switch = cv.switch_roots.front();
    cv.cells_apart = std::abs(cv.x_switch - cv.x_star) / g.spacing(cv.x_star);
  }
  return cv;
}

GriddedFunction ValueGrid2D::slice(std::size_t j) const {
  return GriddedFunction(grid, v[j], x_star[j], Tail::power_law, Tail::clamp);
}

double interpolate_in_r(const std::vector<double>& r_nodes, const std::vector<double>& f, double r) {
  if (r_nodes.size() == 1) return f.front();
  if (r <= r_nodes.front()) return f.front();
  if (r >= r_nodes.back()) return f.back();
  const double h = (r_nodes.back() - r_nodes.front()) / static_cast<double>(r_nodes.size() - 1);
  const auto loc = locate_r(r_nodes, r);
  return hermite(f[loc.j], f[loc.j + 1], r_slope(f, loc.j, h), r_slope(f, loc.j + 1, h), h, loc.t);
}

double ValueGrid2D::value_at(std::size_t i, double r) const {
  std::vector<double> col(r_nodes.size());
  for (std::size_t j = 0; j < col.size(); ++j) col[j] = v[j][i];
  return interpolate_in_r(r_nodes, col, r);
}

ValueSurface::ValueSurface(const ValueGrid2D& v) : r_(v.r_nodes) {
  slices_.reserve(v.v.size());
  for (std::size_t j = 0; j < v.v.size(); ++j) slices_.push_back(v.slice(j));
}

double ValueSurface::operator()(double x, double r) const {
  const std::size_t n = r_.size();
  if (n == 1) return slices_.front()(x);
  if (r <= r_.front()) return slices_.front()(x);
  if (r >= r_.back()) return slices_.back()(x);
  const double h = (r_.back() - r_.front()) / static_cast<double>(n - 1);
  const auto loc = locate_r(r_, r);
  // Only the slices feeding the two five-point slopes are evaluated.
  const std::size_t lo = loc.j >= 2 ? loc.j - 2 : 0;
  const std::size_t hi = std::min(n - 1, loc.j + 3);
  std::vector<double> col(n, 0.0);
  for (std::size_t j = lo; j <= hi; ++j) col[j] = slices_[j](x);
  if (n >= 5) {
    // Stencils reach at most two nodes either side within [0, n-1].
    for (std::size_t j : {loc.j, loc.j + 1}) {
      std::size_t start = j >= 2 ? j - 2 : 0;
      if (start + 4 > n - 1) start = n - 5;
      for (std::size_t k = start; k < start + 5; ++k) {
        if (k < lo || k > hi) col[k] = slices_[k](x);
      }
    }
  }
  return hermite(col[loc.j], col[loc.j + 1], r_slope(col, loc.j, h), r_slope(col, loc.j + 1, h), h, loc.t);
}

namespace {

/// lambda_x Q_x[V] + lambda_r Q_r[V] on every node of every slice.
std::vector<std::vector<double>> jump_term_2d(const ValueGrid2D& v, const Model& model, const Kernels2D& kernels,
                                              const JumpRates& rates, const SolverOptions& options,
                                              double& mass_x, double& mass_r) {
  const Grid1D& g = *v.grid;
  const std::size_t n = g.size();
  const std::size_t nr = v.r_nodes.size();
  std::vector<std::vector<double>> w(nr, std::vector<double>(n, 0.0));
  mass_x = 0.0;
  mass_r = 0.0;
  const double K = model.bio().K;
  if (rates.lambda_x > 0.0) {
    for (std::size_t j = 0; j < nr; ++j) {
      const GriddedFunction f = v.slice(j);
      for (std::size_t i = 0; i < n; ++i) {
        const QValue q = apply_q(f, *kernels.biomass, g[i]);
        w[j][i] += rates.lambda_x * q.value;
        if (g[i] <= K) {
          mass_x = std::max(mass_x, q.clamped_mass);
          if (q.clamped_mass > options.clamp_fraction) {
            throw ClampOverflowError("biomass kernel mass above x_max exceeds the clamp limit; raise x_max");
          }
        }
      }
    }
  }
  if (rates.lambda_r > 0.0) {
    const double h = nr > 1 ? (v.r_nodes.back() - v.r_nodes.front()) / static_cast<double>(nr - 1) : 1.0;
    std::vector<std::vector<double>> slope(nr, std::vector<double>(n, 0.0));
    std::vector<double> col(nr);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < nr; ++j) col[j] = v.v[j][i];
      for (std::size_t j = 0; j < nr; ++j) slope[j][i] = r_slope(col, j, h);
    }
    const auto& rule = kernels.growth->rule();
    const double r_lo = v.r_nodes.front();
    const double r_hi = v.r_nodes.back();
    for (std::size_t j = 0; j < nr; ++j) {
      double clamped = 0.0;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        double rr = v.r_nodes[j] * rule.nodes[k];
        if (rr < r_lo || rr > r_hi) {
          clamped += rule.weights[k];
          rr = std::clamp(rr, r_lo, r_hi);
        }
        const double wk = rates.lambda_r * rule.weights[k];
        if (nr == 1) {
          for (std::size_t i = 0; i < n; ++i) w[j][i] += wk * v.v[0][i];
          continue;
        }
        const auto loc = locate_r(v.r_nodes, rr);
        for (std::size_t i = 0; i < n; ++i) {
          w[j][i] += wk * hermite(v.v[loc.j][i], v.v[loc.j + 1][i], slope[loc.j][i], slope[loc.j + 1][i], h, loc.t);
        }
      }
      mass_r = std::max(mass_r, clamped);
    }
  }
  return w;
}

void check_kernels_2d(const Kernels2D& kernels, const JumpRates& rates) {
  rates.validate();
  if (rates.lambda_x > 0.0 && !kernels.biomass) throw std::invalid_argument("biomass jump rate needs a biomass kernel");
  if (rates.lambda_r > 0.0 && !kernels.growth) throw std::invalid_argument("growth jump rate needs a growth kernel");
}

}  // namespace

ValueGrid2D solve_value_2d(const Model& model, const Kernels2D& kernels, const JumpRates& rates, const GridSpec& spec,
                           const SolverOptions& options) {
  check_kernels_2d(kernels, rates);
  ValueGrid2D cur;
  const KernelSpec* kx = kernels.biomass ? &*kernels.biomass : nullptr;
  cur.grid = std::make_shared<const Grid1D>(make_biomass_grid(model, kx, spec));
  cur.r_nodes = make_growth_grid(model, spec);
  cur.rates = rates;
  const std::size_t n = cur.grid->size();
  const std::size_t nr = cur.r_nodes.size();
  cur.v.assign(nr, std::vector<double>(n, 0.0));
  cur.x_star.assign(nr, std::numeric_limits<double>::quiet_NaN());
  const double rho = model.econ().delta + rates.total();

  std::vector<double> gaps;
  double mass_x = 0.0;
  double mass_r = 0.0;
  for (int it = 1; it <= options.max_iter; ++it) {
    double mx = 0.0;
    double mr = 0.0;
    const auto w = jump_term_2d(cur, model, kernels, rates, options, mx, mr);
    mass_x = std::max(mass_x, mx);
    mass_r = std::max(mass_r, mr);
    ValueGrid2D next = cur;
    double gap = 0.0;
    double vmax = 0.0;
    for (std::size_t j = 0; j < nr; ++j) {
      auto sol = solve_slice(cur.grid, model, cur.r_nodes[j], rho, w[j], options);
      for (std::size_t i = 0; i < n; ++i) {
        gap = std::max(gap, std::abs(sol.v[i] - cur.v[j][i]));
        vmax = std::max(vmax, std::abs(sol.v[i]));
      }
      next.v[j] = std::move(sol.v);
      next.x_star[j] = sol.x_star;
    }
    gaps.push_back(gap);
    cur = std::move(next);
    if (gap <= options.tol * std::max(1.0, vmax)) {
      cur.gaps = gaps;
      cur.iterations = it;
      cur.max_clamped_mass = mass_x;
      cur.max_clamped_mass_r = mass_r;
      cur.v_x.resize(nr);
      for (std::size_t j = 0; j < nr; ++j) cur.v_x[j] = node_derivatives(*cur.grid, cur.v[j], cur.x_star[j]).d1;
      cur.residual = value_defect_2d(cur, model, kernels);
      return cur;
    }
  }
  throw ConvergenceError("2-D value iteration did not converge in " + std::to_string(options.max_iter) + " sweeps",
                         gaps);
}

double value_defect_2d(const ValueGrid2D& v, const Model& model, const Kernels2D& kernels) {
  const Grid1D& g = *v.grid;
  const std::size_t n = g.size();
  const auto& econ = model.econ();
  const double rho = econ.delta + v.rates.total();
  double mx = 0.0;
  double mr = 0.0;
  SolverOptions loose;
  loose.clamp_fraction = 1.0;
  const auto w = jump_term_2d(v, model, kernels, v.rates, loose, mx, mr);
  double worst = 0.0;
  const double reach = v.rates.lambda_x > 0.0 ? kernels.biomass->max_multiplier() : 0.0;
  for (std::size_t j = 0; j < v.r_nodes.size(); ++j) {
    const auto d = node_derivatives(g, v.v[j], v.x_star[j]);
    const double r = v.r_nodes[j];
    for (std::size_t i = 2; i + 2 < n; ++i) {
      if (i + 4 < n && g[i + 4] * reach > g.hi()) break;
      const double x = g[i];
      const double vp = d.d1[i];
      const double res = std::max(model.l0(x) - model.h0(x) * vp, 0.0) * econ.e_max +
                         vp * model.growth(x, r).g - rho * v.v[j][i] + w[j][i];
      worst = std::max(worst, std::abs(res));
    }
  }
  return worst;
}

CriticalCurve critical_value_2d(const ValueGrid2D& v, const Model& model, const Kernels2D& kernels,
                                const SolverOptions& options) {
  check_kernels_2d(kernels, v.rates);
  const Grid1D& g = *v.grid;
  const ValueSurface surface(v);
  const double delta = model.econ().delta;
  const double lx = v.rates.lambda_x;
  const double lr = v.rates.lambda_r;
  const double r_lo = v.r_nodes.front();
  const double r_hi = v.r_nodes.back();
  CriticalCurve curve;
  for (std::size_t j = 0; j < v.r_nodes.size(); ++j) {
    const double r = v.r_nodes[j];
    const GriddedFunction& f = surface.slice(j);
    auto gap_fn = [&](double x) {
      double q = 0.0;
      if (lx > 0.0) q += lx * (apply_q(f, *kernels.biomass, x).value - f(x));
      if (lr > 0.0) {
        q += lr * (apply_q_growth([&](double xx, double rr) { return surface(xx, rr); }, *kernels.growth, x, r, r_lo,
                                  r_hi)
                       .value -
                   f(x));
      }
      return q;
    };
    auto five = [&](const std::function<double(double)>& fn, double x) {
      const double h = g.spacing(x);
      return (fn(x - 2 * h) - 8 * fn(x - h) + 8 * fn(x + h) - fn(x + 2 * h)) / (12 * h);
    };
    auto ratio_form = [&](double x) {
      const auto gr = model.growth(x, r);
      const auto mg = model.margin(x);
      double jump = 0.0;
      if (lx + lr > 0.0) jump = -five(gap_fn, x) / five([&](double y) { return f(y); }, x);
      return (delta - gr.dg + jump) * mg.m - mg.dm * gr.g;
    };
    auto roots = scan_roots(ratio_form, g.nodes(), model.break_even_biomass(), model.bio().K, options.root_tol);
    if (roots.empty()) throw CriticalValueError("no interior critical value at r = " + std::to_string(r));
    auto switching = [&](double x) { return model.margin(x).m - f.derivative(x); };
    auto sw = scan_roots(switching, g.nodes(), model.break_even_biomass(), model.bio().K, options.root_tol);
    curve.r.push_back(r);
    curve.x_star.push_back(roots.front());
    curve.n_roots.push_back(roots.size());
    curve.cells_apart.push_back(sw.empty() ? std::numeric_limits<double>::quiet_NaN()
                                           : std::abs(sw.front() - roots.front()) / g.spacing(roots.front()));
  }
  return curve;
}

ThresholdPolicy policy_from_value(double x_star, const Model& model) {
  if (!(x_star > 0.0 && x_star < model.bio().K)) throw CriticalValueError("critical biomass must lie in (0, K)");
  ThresholdPolicy p;
  p.x_star = x_star;
  p.e_max = model.econ().e_max;
  const double e = model.singular_effort(x_star);
  p.singular_admissible = e >= 0.0 && e <= p.e_max;
  return p;
}

ThresholdPolicy policy_from_value(const std::vector<double>& r_nodes, const std::vector<double>& x_star,
                                  const Model& model) {
  if (r_nodes.size() != x_star.size() || r_nodes.empty()) {
    throw std::invalid_argument("policy_from_value: curve and r nodes differ in length");
  }
  ThresholdPolicy p;
  p.r_nodes = r_nodes;
  p.x_star_curve = x_star;
  p.e_max = model.econ().e_max;
  for (std::size_t j = 0; j < r_nodes.size(); ++j) {
    if (!(x_star[j] > 0.0 && x_star[j] < model.bio().K)) {
      throw CriticalValueError("critical biomass must lie in (0, K)");
    }
    const double e = model.singular_effort(x_star[j], r_nodes[j]);
    if (!(e >= 0.0 && e <= p.e_max)) p.singular_admissible = false;
  }
  return p;
}

}  // namespace harvest
