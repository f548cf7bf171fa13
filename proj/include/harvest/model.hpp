#pragma once

#include <functional>
#include <string>

namespace harvest {

/// Biological parameters of the logistic stock.
struct BioParams {
  double r = 1.0;  ///< intrinsic growth rate (1/time)
  double K = 1.0;  ///< carrying capacity (biomass)
};

/// Economic parameters. Gain is l(x,e) = (p q x - c) e and harvest h(x,e) = q x e.
struct EconParams {
  double p = 2.0;       ///< unit price
  double q = 1.0;       ///< catchability
  double c = 1.0;       ///< unit effort cost
  double delta = 0.05;  ///< discount rate
  double e_max = 1.0;   ///< effort bound
};

/// Poisson rates of biomass and growth-rate updates. lambda_r == 0 is the
/// biomass-only model.
struct JumpRates {
  double lambda_x = 0.0;
  double lambda_r = 0.0;

  double total() const noexcept { return lambda_x + lambda_r; }
  void validate() const;
};

struct GrowthDerivs {
  double g = 0.0;    ///< G(x)
  double dg = 0.0;   ///< G'(x)
  double d2g = 0.0;  ///< G''(x)
};

/// A concave growth law G(x; r, K) with its first two x-derivatives.
class GrowthLaw {
 public:
  using Fn = std::function<GrowthDerivs(double x, double r, double K)>;

  static GrowthLaw logistic();
  static GrowthLaw custom(std::string name, Fn fn);

  GrowthDerivs operator()(double x, double r, double K) const { return fn_(x, r, K); }
  const std::string& name() const noexcept { return name_; }
  bool is_logistic() const noexcept { return logistic_; }

 private:
  GrowthLaw(std::string name, Fn fn, bool logistic)
      : name_(std::move(name)), fn_(std::move(fn)), logistic_(logistic) {}

  std::string name_;
  Fn fn_;
  bool logistic_ = false;
};

/// l0, h0, their ratio m = l0/h0 and m'.
struct Margin {
  double l0 = 0.0;
  double h0 = 0.0;
  double m = 0.0;
  double dm = 0.0;
};

/// Immutable bundle of biological and economic parameters plus the growth law.
/// Construction enforces positive margin at carrying capacity (p q K > c).
class Model {
 public:
  Model(BioParams bio, EconParams econ, GrowthLaw growth = GrowthLaw::logistic());

  const BioParams& bio() const noexcept { return bio_; }
  const EconParams& econ() const noexcept { return econ_; }
  const GrowthLaw& growth_law() const noexcept { return growth_; }

  Model with_growth_rate(double r) const;
  Model with_e_max(double e_max) const;
  Model with_discount(double delta) const;

  GrowthDerivs growth(double x) const { return growth(x, bio_.r); }
  GrowthDerivs growth(double x, double r) const;

  double l0(double x) const noexcept { return econ_.p * econ_.q * x - econ_.c; }
  double h0(double x) const noexcept { return econ_.q * x; }
  Margin margin(double x) const;

  /// G(x; r) - h0(x) e, with e checked against [0, e_max].
  double drift(double x, double e) const { return drift(x, e, bio_.r); }
  double drift(double x, double e, double r) const;

  /// Effort that holds the stock constant: G(x; r) / h0(x).
  double singular_effort(double x) const { return singular_effort(x, bio_.r); }
  double singular_effort(double x, double r) const;

  /// c / (p q): below this biomass harvesting loses money.
  double break_even_biomass() const noexcept { return econ_.c / (econ_.p * econ_.q); }

 private:
  BioParams bio_;
  EconParams econ_;
  GrowthLaw growth_;
};

GrowthDerivs growth_eval(double x, double r, double K);
Margin margin_eval(double x, const EconParams& econ);
double controlled_drift(double x, double e, const Model& model);

}  // namespace harvest
