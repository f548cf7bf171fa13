#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "harvest/analysis.hpp"
#include "harvest/model.hpp"
#include "harvest/solver.hpp"

namespace harvest {

struct SimulateConfig {
  double x0 = 0.5;
  double r0 = 0.0;       ///< 0 means the model's r
  double horizon = 0.0;  ///< 0 means default_horizon(model)
  int replicates = 1000;
  int trajectories = 3;
  double dt = 1e-3;
  double sample_interval = 0.05;
  unsigned threads = 0;  ///< 0 means hardware concurrency
};

struct SensitivityConfig {
  double lambda1 = 1e-3;
  double epsilon = 0.05;
  std::vector<double> epsilon_list{0.02, 0.04, 0.08};
  std::vector<double> kernel_means{0.5, -0.5};
  std::vector<double> e_max_regimes{1.0, 0.4};
  std::vector<double> r_list{0.8, 1.0, 1.2};
  DualSensitivitySettings dual{};
};

struct VerifyConfig {
  std::size_t n_smooth_fit = 1301;  ///< grid size giving spacing <= 1e-3 K at x*
  std::size_t n_fine = 2501;        ///< grid size giving spacing <= 5e-4 K at x*
  GridSpec dual_grid = [] {
    GridSpec g;
    g.n_r = 21;
    g.r_lo_frac = 0.8;
    g.r_hi_frac = 1.2;
    return g;
  }();
  bool dual = true;
};

struct RunConfig {
  BioParams bio{};
  EconParams econ{};
  JumpRates rates{};
  Kernels2D kernels{};
  GridSpec grid{};
  SolverOptions solver{};
  SimulateConfig simulate{};
  SensitivityConfig sensitivity{};
  VerifyConfig verify{};
  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "out";
  /// 16 hex digits identifying the configuration apart from seed and output directory.
  std::string hash;

  Model model() const { return Model(bio, econ); }
  /// Biomass kernel, or the identity jump when none is configured.
  KernelSpec biomass_kernel() const;
  bool dual() const { return rates.lambda_r > 0.0; }
};

/// Parses a JSON configuration. Unknown keys, wrong types and invalid values
/// raise ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace harvest
