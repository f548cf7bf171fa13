#include "harvest/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace harvest {

double ThresholdPolicy::threshold(double r) const {
  if (!is_curve()) return x_star;
  if (r_nodes.size() != x_star_curve.size() || r_nodes.empty()) {
    throw std::logic_error("threshold curve and r nodes differ in length");
  }
  if (r <= r_nodes.front()) return x_star_curve.front();
  if (r >= r_nodes.back()) return x_star_curve.back();
  const auto it = std::upper_bound(r_nodes.begin(), r_nodes.end(), r);
  const auto j = static_cast<std::size_t>(it - r_nodes.begin());
  const double t = (r - r_nodes[j - 1]) / (r_nodes[j] - r_nodes[j - 1]);
  return (1.0 - t) * x_star_curve[j - 1] + t * x_star_curve[j];
}

double ThresholdPolicy::effort(const Model& model, double x, double r) const {
  const double xs = threshold(r);
  if (x < xs) return 0.0;
  if (x > xs) return e_max;
  return std::min(model.singular_effort(x, r), e_max);
}

}  // namespace harvest
