#include "harvest/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace harvest {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void JumpRates::validate() const {
  if (!std::isfinite(lambda_x) || lambda_x < 0.0 || !std::isfinite(lambda_r) || lambda_r < 0.0) {
    throw std::invalid_argument("jump rates must be finite and non-negative");
  }
}

GrowthLaw GrowthLaw::logistic() {
  return GrowthLaw("logistic", [](double x, double r, double K) { return growth_eval(x, r, K); },
                   true);
}

GrowthLaw GrowthLaw::custom(std::string name, Fn fn) {
  if (!fn) throw std::invalid_argument("growth law needs a callable");
  return GrowthLaw(std::move(name), std::move(fn), false);
}

GrowthDerivs growth_eval(double x, double r, double K) {
  if (!(x >= 0.0)) throw std::invalid_argument("growth_eval: biomass must be >= 0");
  return {r * x * (1.0 - x / K), r * (1.0 - 2.0 * x / K), -2.0 * r / K};
}

Margin margin_eval(double x, const EconParams& econ) {
  if (!(x > 0.0)) throw std::invalid_argument("margin_eval: biomass must be > 0");
  const double l0 = econ.p * econ.q * x - econ.c;
  const double h0 = econ.q * x;
  return {l0, h0, econ.p - econ.c / (econ.q * x), econ.c / (econ.q * x * x)};
}

double controlled_drift(double x, double e, const Model& model) { return model.drift(x, e); }

Model::Model(BioParams bio, EconParams econ, GrowthLaw growth)
    : bio_(bio), econ_(econ), growth_(std::move(growth)) {
  if (!positive_finite(bio_.r) || !positive_finite(bio_.K)) {
    throw std::invalid_argument("growth rate r and carrying capacity K must be positive");
  }
  if (!positive_finite(econ_.p) || !positive_finite(econ_.q)) {
    throw std::invalid_argument("price p and catchability q must be positive");
  }
  if (!std::isfinite(econ_.c) || econ_.c < 0.0) {
    throw std::invalid_argument("effort cost c must be non-negative");
  }
  if (!positive_finite(econ_.delta)) throw std::invalid_argument("discount rate must be positive");
  if (!positive_finite(econ_.e_max)) throw std::invalid_argument("effort bound must be positive");
  if (!(econ_.p * econ_.q * bio_.K - econ_.c > 0.0)) {
    throw std::invalid_argument("need p q K - c > 0 (positive margin at carrying capacity)");
  }
}

Model Model::with_growth_rate(double r) const {
  BioParams b = bio_;
  b.r = r;
  return Model(b, econ_, growth_);
}

Model Model::with_e_max(double e_max) const {
  EconParams e = econ_;
  e.e_max = e_max;
  return Model(bio_, e, growth_);
}

Model Model::with_discount(double delta) const {
  EconParams e = econ_;
  e.delta = delta;
  return Model(bio_, e, growth_);
}

GrowthDerivs Model::growth(double x, double r) const {
  if (!(x >= 0.0)) throw std::invalid_argument("growth: biomass must be >= 0");
  return growth_(x, r, bio_.K);
}

Margin Model::margin(double x) const { return margin_eval(x, econ_); }

double Model::drift(double x, double e, double r) const {
  if (!(e >= 0.0 && e <= econ_.e_max)) {
    throw std::invalid_argument("effort " + std::to_string(e) + " outside [0, e_max]");
  }
  return growth(x, r).g - h0(x) * e;
}

double Model::singular_effort(double x, double r) const {
  if (!(x > 0.0)) throw std::invalid_argument("singular_effort: biomass must be > 0");
  return growth(x, r).g / h0(x);
}

}  // namespace harvest
