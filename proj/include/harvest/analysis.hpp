#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <string>
#include <vector>

#include "harvest/solver.hpp"

namespace harvest {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Sigma(x) = -x^2 V'' [G/x]' + (delta - G')(V' + V'' x) - G'' V' x from given
/// derivative values.
double sigma_from(double x, double v1, double v2, const Model& model, double r);
inline double sigma_from(double x, double v1, double v2, const Model& model) {
  return sigma_from(x, v1, v2, model, model.bio().r);
}

/// Sigma at x from the solved grid. Derivatives come from one-sided stencils
/// on the side of the threshold that x lies on (both sides averaged at x*).
double sigma(double x, const ValueGrid& v, const Model& model);

struct RegularityReport {
  double x_star = kNaN;
  double v2_left = kNaN;
  double v2_right = kNaN;
  double m_prime_at_star = kNaN;
  double j_left = kNaN;   ///< [x^2 V'']' from below
  double j_right = kNaN;  ///< [x^2 V'']' from above
  double sigma_at_star = kNaN;
  double singular_effort = kNaN;
  double j_left_predicted = kNaN;   ///< x Sigma / (h0 E)
  double j_right_predicted = kNaN;  ///< -x Sigma / (h0 (e_max - E))
  double smooth_fit_error = kNaN;   ///< max relative deviation of v2_left, v2_right from m'
  double j_left_error = kNaN;
  double j_right_error = kNaN;
  double ratio = kNaN;            ///< j_left / j_right
  double ratio_predicted = kNaN;  ///< -(e_max - E) / E
  double spacing = kNaN;

  bool smooth_fit(double tol = 0.05) const { return smooth_fit_error < tol; }
  bool kink_signs() const { return j_left > 0.0 && j_right < 0.0 && sigma_at_star > 0.0; }
  bool kink_ratios(double tol = 0.10) const { return j_left_error < tol && j_right_error < tol; }
};

RegularityReport regularity_check(const ValueGrid& v, const Model& model);

struct SensitivityReport {
  std::vector<double> lambdas;
  std::vector<double> x_stars;
  double slope_at_zero = kNaN;
  /// Same estimate with the ladder step halved.
  double slope_half_step = kNaN;
  double noise = kNaN;
  double discriminant = kNaN;  ///< [Q[V]]'(x*) - V'(x*) at lambda = 0
  int prediction = 0;          ///< sign implied by the discriminant
  bool resolved = false;       ///< |slope| above 3x noise
  bool agree = false;
  bool ambiguous = false;      ///< several critical values at some probed lambda
};

/// Critical value along the ladder {0, l1, 2 l1} (and {l1/2, l1} for the
/// step-halving check), forward-difference slope at 0 and the discriminant.
SensitivityReport lambda_sensitivity(const Model& model, const KernelSpec& kernel, double lambda1,
                                     const GridSpec& grid = {}, const SolverOptions& options = {});

/// [Q[V]]'(x*) - V'(x*) on a solved grid.
double discriminant(const ValueGrid& v, const KernelSpec& kernel);

struct ScalingReport {
  std::vector<double> scale;
  std::vector<double> discriminant;
  double log_slope = kNaN;  ///< least-squares slope of log|discriminant| against log(scale)
};

/// Discriminant of the lambda = 0 solution for centered kernels x(1 + Z eps)
/// over a list of eps, all on one grid wide enough for the largest eps.
ScalingReport discriminant_scaling(const Model& model, const DiscreteDistribution& h,
                                   const std::vector<double>& epsilons, const GridSpec& grid = {});

/// x* at which the centered-kernel direction flips for logistic growth.
double flip_threshold(const Model& model);

struct GrowthSensitivityReport {
  std::vector<double> r;
  std::vector<double> x_star;
  bool increasing = false;
};

GrowthSensitivityReport growth_sensitivity(const Model& model, const std::vector<double>& r_list,
                                           const GridSpec& grid = {});

/// (delta / r) l0 / h0^2.
double sigma1(double x, double r, const Model& model);

struct DualRegularityRow {
  double r = kNaN;
  double x_star = kNaN;
  double x_star_slope = kNaN;  ///< x*'(r)
  double v_xr = kNaN;
  double v_xxr_left = kNaN;
  double v_xxr_right = kNaN;
  double v_xxr_left_predicted = kNaN;   ///< -Sigma1 / E
  double v_xxr_right_predicted = kNaN;  ///< Sigma1 / (e_max - E)
  double v_xrr_left = kNaN;
  double v_xrr_right = kNaN;
  double linkage_left = kNaN;   ///< V_xxr^- x*' + V_xrr^-
  double linkage_right = kNaN;  ///< V_xxr^+ x*' + V_xrr^+
  double noise_v_xr = kNaN;
  double noise_linkage_left = kNaN;
  double noise_linkage_right = kNaN;
  double smooth_fit_error = kNaN;  ///< per-slice V'' one-sided vs m'

  bool v_xr_ok() const { return std::abs(v_xr) < 10.0 * noise_v_xr; }
  bool signs_ok() const { return v_xxr_left < 0.0 && v_xxr_right > 0.0; }
  bool linkage_ok() const {
    return std::abs(linkage_left) < 10.0 * noise_linkage_left &&
           std::abs(linkage_right) < 10.0 * noise_linkage_right;
  }
  double ratio_error() const;
};

struct DualRegularityReport {
  std::vector<DualRegularityRow> rows;
  bool all_ok() const;
};

/// Mixed-derivative checks at (x*(r), r) for r nodes shared by the fine and
/// coarse grids and far enough from the r-grid ends for the stencils. Both grids
/// must be lambda_x = lambda_r = 0 solutions. The noise floor of each quantity is
/// the largest fine/coarse difference over all rows.
DualRegularityReport dual_regularity_check(const ValueGrid2D& fine, const ValueGrid2D& coarse,
                                           const Model& model);
/// Solves both grids itself, the coarse one with half the nodes in x and r.
DualRegularityReport dual_regularity_check(const Model& model, const GridSpec& grid = {});

struct DualSensitivityRow {
  std::string label;      ///< which statement the row probes
  std::string channel;    ///< "lambda_x" or "lambda_r"
  double r = kNaN;
  double e_max = kNaN;
  double singular_effort = kNaN;  ///< E(x*(r), r) at zero rates
  double kernel_mean = kNaN;      ///< E[Z] or E[S]
  double slope = kNaN;            ///< dx*(r)/d(rate) at 0
  double noise = kNaN;
  double discriminant = kNaN;
  int slope_sign = 0;
  int discriminant_sign = 0;
  int predicted_sign = 0;  ///< sign stated by the probed statement, 0 if none
  std::string status;      ///< PASS, FAIL or REPORT-ONLY
  std::string note;
};

struct DualSensitivityCase {
  std::string label;
  std::string channel;
  Model model;
  KernelSpec kernel;
  int predicted_sign = 0;
  bool assert_prediction = false;
};

/// x*(r0) slope in one rate at 0 plus the matching discriminant from the
/// zero-rate surface, for one probe. r0 = model.bio().r must be a node of the
/// growth-rate grid.
DualSensitivityRow dual_sensitivity(const DualSensitivityCase& probe, double rate1, const GridSpec& grid = {},
                                    const SolverOptions& options = {});

struct DualSensitivitySettings {
  double epsilon = 0.05;  ///< biomass kernel scale
  double xi = 0.2;        ///< growth kernel scale
  double rate1_x = 1e-3;  ///< ladder step in lambda_x
  double rate1_r = 1e-2;  ///< ladder step in lambda_r
  /// Effort bounds for the centered-kernel rows, one on each side of E = e_max / 2.
  std::vector<double> centered_e_max{1.0, 0.4};
  /// (e_max, |E[S]|) pairs on which the growth-kernel mean is flipped and the
  /// direction must not change.
  std::vector<std::pair<double, double>> mean_flip_asserted{{1.0, 0.2}, {2.0, 0.5}};
  std::vector<std::pair<double, double>> mean_flip_reported{{1.0, 0.5}};
  GridSpec grid = [] {
    GridSpec g;
    g.n_r = 21;
    return g;
  }();
};

/// Every biomass- and growth-rate sensitivity row of the dual-update model.
std::vector<DualSensitivityRow> dual_sensitivity_table(const Model& model, const DualSensitivitySettings& settings = {},
                                                       const SolverOptions& options = {});

}  // namespace harvest
