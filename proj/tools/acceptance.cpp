#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <thread>

#include "harvest/analysis.hpp"
#include "harvest/commands.hpp"
#include "harvest/simulator.hpp"

using namespace harvest;

namespace {

namespace fs = std::filesystem;

Model baseline() { return Model(BioParams{1.0, 1.0}, EconParams{2.0, 1.0, 1.0, 0.05, 1.0}); }
KernelSpec identity() { return KernelSpec::uniform(1.0, 1.0); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

/// Positive root of the threshold equation for logistic growth with linear costs.
double quadratic_root(double p, double c, double r, double delta) {
  const double a = 2 * r * p;
  const double b = p * (delta - r) - c * r;
  const double cc = -c * delta;
  return (-b + std::sqrt(b * b - 4 * a * cc)) / (2 * a);
}

Outcome closed_form() {
  const auto t0 = std::chrono::steady_clock::now();
  const Model m(BioParams{1.0, 1.0}, EconParams{2.0, 1.0, 0.0, 0.05, 1.0});
  const auto v = solve_value_1d(m, identity(), 0.0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double err = std::abs(v.x_star - 0.475);
  return {err < 1e-6 && secs < 10.0, fmt("x*=%.9f |err|=%.2e runtime=%.2fs", v.x_star, err, secs)};
}

Outcome derived_threshold() {
  const auto v = solve_value_1d(baseline(), identity(), 0.0);
  const double oracle = quadratic_root(2.0, 1.0, 1.0, 0.05);
  const double err = std::abs(v.x_star - oracle);
  return {err < 1e-6, fmt("x*=%.9f oracle=%.9f |err|=%.2e", v.x_star, oracle, err)};
}

Outcome fixed_point() {
  const Model m = baseline();
  const double lambda = 0.1;
  const auto k = KernelSpec::uniform(0.8, 1.2);
  const auto v0 = solve_value_1d(m, identity(), 0.0);
  const auto v1 = solve_value_1d(m, k, lambda);
  const double d0 = value_defect_1d(v0, m, identity(), 0.0);
  const double d1 = value_defect_1d(v1, m, k, lambda);
  const double k1 = contraction_factor(v1.gaps);
  const double b1 = lambda / (m.econ().delta + lambda) + 0.05;

  Kernels2D kernels{k, KernelSpec::growth(0.2, DiscreteDistribution::two_point())};
  const JumpRates rates{0.05, 0.05};
  GridSpec spec;
  spec.n_r = 21;
  const auto v2 = solve_value_2d(m, kernels, rates, spec);
  const double d2 = value_defect_2d(v2, m, kernels);
  const double k2 = contraction_factor(v2.gaps);
  const double b2 = rates.total() / (m.econ().delta + rates.total()) + 0.05;
  const bool ok = d0 < 1e-8 && d1 < 1e-8 && d2 < 1e-8 && k1 <= b1 && k2 <= b2;
  return {ok, fmt("defect(lambda=0)=%.2e defect(lambda=0.1)=%.2e contraction=%.4f<=%.4f "
                  "defect(dual)=%.2e contraction(dual)=%.4f<=%.4f",
                  d0, d1, k1, b1, d2, k2, b2)};
}

Outcome smooth_fit() {
  GridSpec spec;
  spec.n = 1301;
  const Model m = baseline();
  const auto rep = regularity_check(solve_value_1d(m, identity(), 0.0, spec), m);
  return {rep.smooth_fit() && rep.spacing <= 1e-3,
          fmt("V''(x*-)=%.6f V''(x*+)=%.6f c/(q x*^2)=%.6f rel.err=%.2e spacing=%.2e", rep.v2_left, rep.v2_right,
              rep.m_prime_at_star, rep.smooth_fit_error, rep.spacing)};
}

Outcome kinks() {
  GridSpec spec;
  spec.n = 2501;
  const Model m = baseline();
  const auto rep = regularity_check(solve_value_1d(m, identity(), 0.0, spec), m);
  return {rep.kink_signs() && rep.kink_ratios(),
          fmt("left=%.4f (pred %.4f, err %.1e) right=%.4f (pred %.4f, err %.1e) Sigma=%.4f", rep.j_left,
              rep.j_left_predicted, rep.j_left_error, rep.j_right, rep.j_right_predicted, rep.j_right_error,
              rep.sigma_at_star)};
}

Outcome monte_carlo() {
  const auto t0 = std::chrono::steady_clock::now();
  const Model m = baseline();
  const auto k = KernelSpec::uniform(0.8, 1.2);
  const double x0 = 0.5;
  const int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool ok = true;
  std::string detail;
  for (double lambda : {0.0, 0.1}) {
    const auto& kernel = lambda > 0.0 ? k : identity();
    const auto v = solve_value_1d(m, kernel, lambda);
    GridSpec coarse;
    coarse.n = 1001;
    const auto vc = solve_value_1d(m, kernel, lambda, coarse);
    const double value = v.function()(x0);
    const double grid_tol = std::abs(value - vc.function()(x0));

    FlowOptions flow;
    flow.x_max = v.grid->hi();
    flow.record = false;
    SimulationSetup s{.model = m,
                      .rates = {lambda, 0.0},
                      .kernel_x = lambda > 0.0 ? std::optional<KernelSpec>(k) : std::nullopt,
                      .kernel_r = std::nullopt,
                      .policy = policy_from_value(v.x_star, m),
                      .override_policy = std::nullopt,
                      .horizon = default_horizon(m),
                      .flow = flow};
    const auto est = monte_carlo_value(s, x0, 1.0, 10000, RunConfig{}.seed, threads);
    const double diff = std::abs(est.mean - value);
    const double bound = est.half_width + est.truncation_bound + 2 * grid_tol;
    ok = ok && diff <= bound;
    detail += fmt("lambda=%.1f: |mean-V|=%.2e <= %.2e (hw %.2e, trunc %.1e, grid %.1e); ", lambda, diff, bound,
                  est.half_width, est.truncation_bound, grid_tol);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail += fmt("runtime=%.1fs", secs);
  return {ok && secs < 300.0, detail};
}

Outcome sign_law() {
  const Model m = baseline();
  bool ok = true;
  std::string detail;
  for (double mean : {0.5, -0.5}) {
    const auto rep =
        lambda_sensitivity(m, KernelSpec::centered(0.05, DiscreteDistribution::two_point_mean(mean)), 1e-3);
    const bool row = rep.resolved && rep.agree && !rep.ambiguous && ((rep.slope_at_zero > 0) == (mean > 0));
    ok = ok && row;
    detail += fmt("E[Z]=%+.1f slope=%+.3e; ", mean, rep.slope_at_zero);
  }
  int signs[2] = {0, 0};
  int idx = 0;
  for (double e_max : {1.0, 0.4}) {
    const Model mm = m.with_e_max(e_max);
    const double thr = flip_threshold(mm);
    const auto rep = lambda_sensitivity(mm, KernelSpec::centered(0.05, DiscreteDistribution::two_point()), 1e-3);
    const bool above = rep.x_stars.front() > thr;
    signs[idx++] = rep.slope_at_zero > 0 ? 1 : -1;
    ok = ok && rep.resolved && rep.agree && ((rep.slope_at_zero > 0) == above);
    detail += fmt("centered e_max=%.1f x*=%.4f %s %.4f slope=%+.3e; ", e_max, rep.x_stars.front(),
                  above ? ">" : "<", thr, rep.slope_at_zero);
  }
  ok = ok && signs[0] != signs[1];
  const auto sc = discriminant_scaling(m, DiscreteDistribution::two_point(), {0.02, 0.04, 0.08});
  ok = ok && std::abs(sc.log_slope - 2.0) < 0.2;
  detail += fmt("eps-scaling slope=%.3f", sc.log_slope);
  return {ok, detail};
}

Outcome growth() {
  const auto rep = growth_sensitivity(baseline(), {0.8, 1.0, 1.2});
  return {rep.increasing, fmt("x*(0.8)=%.6f x*(1.0)=%.6f x*(1.2)=%.6f", rep.x_star[0], rep.x_star[1], rep.x_star[2])};
}

Outcome dual_regularity() {
  GridSpec spec;
  spec.n = 2501;
  spec.n_r = 41;
  spec.r_lo_frac = 0.8;
  spec.r_hi_frac = 1.2;
  const auto rep = dual_regularity_check(baseline(), spec);
  double xr = 0.0, link = 0.0;
  bool signs = !rep.rows.empty();
  for (const auto& row : rep.rows) {
    xr = std::max(xr, std::abs(row.v_xr) / row.noise_v_xr);
    link = std::max(link, std::max(std::abs(row.linkage_left) / row.noise_linkage_left,
                                   std::abs(row.linkage_right) / row.noise_linkage_right));
    signs = signs && row.signs_ok();
  }
  return {rep.all_ok(), fmt("%zu interior r nodes: max |V_xr|/noise=%.2f max linkage/noise=%.2f signs %s",
                            rep.rows.size(), xr, link, signs ? "ordered" : "NOT ordered")};
}

Outcome dual_directions() {
  const auto rows = dual_sensitivity_table(baseline());
  bool ok = rows.size() == 12;
  int asserted = 0, reported = 0;
  std::string detail;
  for (const auto& r : rows) {
    if (r.status == "REPORT-ONLY") {
      ++reported;
      detail += fmt("\n    REPORT-ONLY %s %s e_max=%.1f mean=%+.2f slope=%+.2e (%s)", r.channel.c_str(),
                    r.label.c_str(), r.e_max, r.kernel_mean, r.slope, r.note.c_str());
    } else {
      ++asserted;
      ok = ok && r.status == "PASS";
      detail += fmt("\n    %s %s %s e_max=%.1f mean=%+.2f slope=%+.2e", r.status.c_str(), r.channel.c_str(),
                    r.label.c_str(), r.e_max, r.kernel_mean, r.slope);
    }
  }
  return {ok, fmt("%d asserted rows, %d report-only rows", asserted, reported) + detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const std::string text = R"({
    "rates": {"lambda_x": 0.1},
    "kernels": {"biomass": {"kind": "uniform", "z_lo": 0.8, "z_hi": 1.2}},
    "simulate": {"replicates": 200, "trajectories": 2, "horizon": 60},
    "seed": 7
  })";
  const fs::path root = fs::temp_directory_path() / "harvest_acceptance_determinism";
  fs::remove_all(root);
  std::ostringstream log;
  for (const char* run : {"a", "b"}) {
    RunConfig c = parse_config(text);
    c.output_dir = root / run;
    c.simulate.threads = run[0] == 'a' ? 1 : 2;
    if (cmd_solve(c, log) != kExitOk || cmd_simulate(c, log) != kExitOk) return {false, "a command failed"};
  }
  std::size_t files = 0;
  bool same = true;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    const fs::path other = root / "b" / entry.path().filename();
    same = same && fs::exists(other) && slurp(entry.path()) == slurp(other);
  }
  fs::remove_all(root);
  return {same && files > 0, fmt("%zu CSV files compared, %s", files, same ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"closed-form threshold without effort cost", closed_form},
      {"threshold against the quadratic-root oracle", derived_threshold},
      {"fixed-point defect and contraction", fixed_point},
      {"smooth fit of V'' at the threshold", smooth_fit},
      {"kink signs and ratios of [x^2 V'']'", kinks},
      {"Monte Carlo against the solved value", monte_carlo},
      {"biomass-jump sensitivity sign law", sign_law},
      {"critical value increasing in the growth rate", growth},
      {"dual-update regularity along the critical curve", dual_regularity},
      {"dual-update sensitivity directions", dual_directions},
      {"byte-identical outputs for a fixed config and seed", determinism},
  };
  int failures = 0;
  int n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", n - failures, n);
  return failures == 0 ? 0 : 1;
}
