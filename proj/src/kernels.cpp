#include "harvest/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace harvest {

DiscreteDistribution DiscreteDistribution::two_point() { return {{-1.0, 1.0}, {0.5, 0.5}, false}; }

DiscreteDistribution DiscreteDistribution::two_point_mean(double mean) {
  if (!(mean >= -1.0 && mean <= 1.0)) throw std::invalid_argument("two-point mean must lie in [-1, 1]");
  return {{-1.0, 1.0}, {0.5 * (1.0 - mean), 0.5 * (1.0 + mean)}, mean != 0.0};
}

double DiscreteDistribution::mean() const {
  double s = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) s += weights[k] * support[k];
  return s;
}

double DiscreteDistribution::second_moment() const {
  double s = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) s += weights[k] * support[k] * support[k];
  return s;
}

void DiscreteDistribution::validate() const {
  if (support.empty() || support.size() != weights.size()) {
    throw std::invalid_argument("distribution needs matching, non-empty support and weights");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (!(support[k] >= -1.0 && support[k] <= 1.0)) {
      throw std::invalid_argument("distribution support must lie in [-1, 1]");
    }
    if (!(weights[k] >= 0.0) || !std::isfinite(weights[k])) {
      throw std::invalid_argument("distribution weights must be non-negative");
    }
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("distribution weights must sum to 1");
  if (asymmetric) return;
  for (std::size_t k = 0; k < support.size(); ++k) {
    double mirrored = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j) {
      if (std::abs(support[j] + support[k]) <= 1e-12) mirrored += weights[j];
    }
    double same = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j) {
      if (std::abs(support[j] - support[k]) <= 1e-12) same += weights[j];
    }
    if (std::abs(mirrored - same) > 1e-12) {
      throw std::invalid_argument("distribution must be symmetric about 0 unless marked asymmetric");
    }
  }
}

MultiplierRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  MultiplierRule rule{std::vector<double>(static_cast<std::size_t>(n)),
                      std::vector<double>(static_cast<std::size_t>(n))};
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -z;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

KernelSpec KernelSpec::uniform(double z_lo, double z_hi, int quadrature_nodes) {
  if (!(z_lo > 0.0) || !(z_hi >= z_lo) || !std::isfinite(z_hi)) {
    throw std::invalid_argument("uniform kernel needs 0 < z_lo <= z_hi");
  }
  if (quadrature_nodes < 1) throw std::invalid_argument("uniform kernel needs quadrature nodes >= 1");
  KernelSpec k;
  k.kind_ = KernelKind::uniform;
  k.z_lo_ = z_lo;
  k.z_hi_ = z_hi;
  k.quadrature_nodes_ = quadrature_nodes;
  if (z_lo == z_hi) {
    k.rule_ = {{z_lo}, {1.0}};
    return k;
  }
  const auto gl = gauss_legendre(quadrature_nodes);
  const double mid = 0.5 * (z_lo + z_hi);
  const double half = 0.5 * (z_hi - z_lo);
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    k.rule_.nodes.push_back(mid + half * gl.nodes[i]);
    k.rule_.weights.push_back(0.5 * gl.weights[i]);
  }
  return k;
}

KernelSpec KernelSpec::centered(double epsilon, DiscreteDistribution h) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("centered kernel needs 0 < epsilon < 1");
  h.validate();
  KernelSpec k;
  k.kind_ = KernelKind::centered;
  k.scale_ = epsilon;
  k.quadrature_nodes_ = static_cast<int>(h.support.size());
  for (std::size_t i = 0; i < h.support.size(); ++i) {
    k.rule_.nodes.push_back(1.0 + h.support[i] * epsilon);
    k.rule_.weights.push_back(h.weights[i]);
  }
  k.z_lo_ = *std::min_element(k.rule_.nodes.begin(), k.rule_.nodes.end());
  k.z_hi_ = *std::max_element(k.rule_.nodes.begin(), k.rule_.nodes.end());
  k.h_ = std::move(h);
  return k;
}

KernelSpec KernelSpec::growth(double xi, DiscreteDistribution h) {
  if (!(xi > 0.0) || !std::isfinite(xi)) throw std::invalid_argument("growth kernel needs xi > 0");
  h.validate();
  KernelSpec k;
  k.kind_ = KernelKind::growth;
  k.scale_ = xi;
  k.quadrature_nodes_ = static_cast<int>(h.support.size());
  for (std::size_t i = 0; i < h.support.size(); ++i) {
    const double m = 1.0 + h.support[i] * xi;
    if (!(m > 0.0)) throw std::invalid_argument("growth kernel support must keep r (1 + s xi) > 0");
    k.rule_.nodes.push_back(m);
    k.rule_.weights.push_back(h.weights[i]);
  }
  k.z_lo_ = *std::min_element(k.rule_.nodes.begin(), k.rule_.nodes.end());
  k.z_hi_ = *std::max_element(k.rule_.nodes.begin(), k.rule_.nodes.end());
  k.h_ = std::move(h);
  return k;
}

double KernelSpec::mean_multiplier() const {
  if (kind_ == KernelKind::uniform) return 0.5 * (z_lo_ + z_hi_);
  return 1.0 + scale_ * h_.mean();
}

double KernelSpec::max_multiplier() const { return z_hi_; }
double KernelSpec::min_multiplier() const { return z_lo_; }

bool KernelSpec::is_identity() const {
  return std::all_of(rule_.nodes.begin(), rule_.nodes.end(), [](double m) { return m == 1.0; });
}

QValue apply_q(const ScalarFn& theta, const KernelSpec& spec, double x, double upper) {
  const auto& rule = spec.rule();
  QValue q;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    double y = x * rule.nodes[k];
    if (y > upper) {
      y = upper;
      q.clamped_mass += rule.weights[k];
    }
    q.value += rule.weights[k] * theta(y);
  }
  return q;
}

QValue apply_q(const GriddedFunction& theta, const KernelSpec& spec, double x) {
  const auto& rule = spec.rule();
  const double upper = theta.hi();
  QValue q;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    double y = x * rule.nodes[k];
    if (y > upper) {
      y = upper;
      q.clamped_mass += rule.weights[k];
    }
    q.value += rule.weights[k] * theta(y);
  }
  return q;
}

QValue apply_q_growth(const std::function<double(double, double)>& theta2, const KernelSpec& spec,
                      double x, double r, double r_lo, double r_hi) {
  const auto& rule = spec.rule();
  QValue q;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    double rr = r * rule.nodes[k];
    if (rr > r_hi || rr < r_lo) {
      rr = std::clamp(rr, r_lo, r_hi);
      q.clamped_mass += rule.weights[k];
    }
    q.value += rule.weights[k] * theta2(x, rr);
  }
  return q;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential draw needs a positive rate");
  return -std::log1p(-uniform()) / rate;
}

JumpDraw sample_jump(const KernelSpec& spec, double state, Rng& rng, double upper) {
  if (!(state > 0.0)) throw std::invalid_argument("sample_jump: state must be > 0");
  double m = 1.0;
  if (spec.kind() == KernelKind::uniform) {
    m = spec.z_lo() + (spec.z_hi() - spec.z_lo()) * rng.uniform();
  } else {
    const auto& rule = spec.rule();
    const double u = rng.uniform();
    double acc = 0.0;
    m = rule.nodes.back();
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      acc += rule.weights[k];
      if (u < acc) {
        m = rule.nodes[k];
        break;
      }
    }
  }
  JumpDraw d{state * m, false};
  if (d.value > upper) {
    d.value = upper;
    d.clamped = true;
  }
  return d;
}

namespace {

double five_point(const std::function<double(double)>& f, double x, double h) {
  return (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
}

double stencil_step(const GriddedFunction& v, double x) {
  const double h = v.grid().spacing(x);
  if (x - 2.0 * h < v.lo() || x + 2.0 * h > v.hi()) {
    throw std::domain_error("q_derivative: x too close to the grid boundary");
  }
  return h;
}

}  // namespace

double q_derivative(const GriddedFunction& v, const KernelSpec& spec, double x) {
  const double h = stencil_step(v, x);
  return five_point([&](double y) { return apply_q(v, spec, y).value; }, x, h);
}

double q_derivative_gap(const GriddedFunction& v, const KernelSpec& spec, double x) {
  const double h = stencil_step(v, x);
  return five_point([&](double y) { return apply_q(v, spec, y).value - v(y); }, x, h);
}

}  // namespace harvest
