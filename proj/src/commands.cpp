#include "harvest/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <thread>

#include "harvest/analysis.hpp"
#include "harvest/csv.hpp"
#include "harvest/error.hpp"
#include "harvest/simulator.hpp"

namespace harvest {

namespace {

namespace fs = std::filesystem;

std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Solved {
  std::optional<ValueGrid> v1;
  std::optional<ValueGrid2D> v2;
  ThresholdPolicy policy;

  const Grid1D& grid() const { return v1 ? *v1->grid : *v2->grid; }
  double value(double x, double r) const {
    if (v1) return v1->function()(x);
    return ValueSurface(*v2)(x, r);
  }
};

Solved solve(const RunConfig& c, std::ostream& log) {
  const Model model = c.model();
  Solved s;
  if (c.dual()) {
    s.v2 = solve_value_2d(model, c.kernels, c.rates, c.grid, c.solver);
    s.policy = policy_from_value(s.v2->r_nodes, s.v2->x_star, model);
    log << "solved 2-D value: " << s.v2->iterations << " sweeps, residual " << brief(s.v2->residual) << '\n';
  } else {
    s.v1 = solve_value_1d(model, c.biomass_kernel(), c.rates.lambda_x, c.grid, c.solver);
    s.policy = policy_from_value(s.v1->x_star, model);
    log << "solved value: x* = " << brief(s.v1->x_star) << ", " << s.v1->iterations << " sweeps, residual "
        << brief(s.v1->residual) << '\n';
  }
  return s;
}

fs::path prepare(const RunConfig& c) {
  fs::create_directories(c.output_dir);
  return c.output_dir;
}

void write_gaps(const RunConfig& c, const std::vector<double>& gaps) {
  CsvWriter w(prepare(c) / "gaps.csv", c.hash, c.seed, {"iteration", "gap"});
  for (std::size_t k = 0; k < gaps.size(); ++k) w.row({static_cast<long long>(k + 1), gaps[k]});
}

std::string status(bool ok) { return ok ? "PASS" : "FAIL"; }


}  // namespace

int cmd_solve(const RunConfig& c, std::ostream& log) {
  const fs::path dir = prepare(c);
  const Model model = c.model();
  const Solved s = solve(c, log);
  const Grid1D& g = s.grid();
  if (s.v1) {
    const ValueGrid& v = *s.v1;
    {
      CsvWriter w(dir / "value.csv", c.hash, c.seed, {"x", "V", "V_prime"});
      for (std::size_t i = 0; i < g.size(); ++i) w.row({g[i], v.v[i], v.v_prime[i]});
    }
    {
      CsvWriter w(dir / "xstar.csv", c.hash, c.seed, {"x_star", "singular_effort", "lambda"});
      w.row({v.x_star, model.singular_effort(v.x_star), v.lambda});
    }
    write_gaps(c, v.gaps);
    CsvWriter w(dir / "residual.csv", c.hash, c.seed, {"quantity", "value"});
    w.row({std::string("residual"), v.residual});
    w.row({std::string("iterations"), static_cast<long long>(v.iterations)});
    w.row({std::string("contraction_factor"), contraction_factor(v.gaps)});
    w.row({std::string("max_clamped_mass"), v.max_clamped_mass});
  } else {
    const ValueGrid2D& v = *s.v2;
    {
      CsvWriter w(dir / "value2d.csv", c.hash, c.seed, {"x", "r", "V", "Vx"});
      for (std::size_t j = 0; j < v.r_nodes.size(); ++j) {
        for (std::size_t i = 0; i < g.size(); ++i) w.row({g[i], v.r_nodes[j], v.v[j][i], v.v_x[j][i]});
      }
    }
    {
      CsvWriter w(dir / "xstar_curve.csv", c.hash, c.seed, {"r", "x_star", "singular_effort"});
      for (std::size_t j = 0; j < v.r_nodes.size(); ++j) {
        w.row({v.r_nodes[j], v.x_star[j], model.singular_effort(v.x_star[j], v.r_nodes[j])});
      }
    }
    write_gaps(c, v.gaps);
    CsvWriter w(dir / "residual.csv", c.hash, c.seed, {"quantity", "value"});
    w.row({std::string("residual"), v.residual});
    w.row({std::string("iterations"), static_cast<long long>(v.iterations)});
    w.row({std::string("contraction_factor"), contraction_factor(v.gaps)});
    w.row({std::string("max_clamped_mass"), v.max_clamped_mass});
    w.row({std::string("max_clamped_mass_r"), v.max_clamped_mass_r});
  }
  CsvWriter w(dir / "policy.csv", c.hash, c.seed, {"r", "x_star", "effort_below", "effort_on", "effort_above"});
  const auto& p = s.policy;
  const std::vector<double> rs = p.r_nodes.empty() ? std::vector<double>{model.bio().r} : p.r_nodes;
  for (double r : rs) {
    const double xs = p.threshold(r);
    w.row({r, xs, 0.0, model.singular_effort(xs, r), p.e_max});
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& log) {
  const fs::path dir = prepare(c);
  const Model model = c.model();
  const Solved s = solve(c, log);
  const auto& sc = c.simulate;
  const double r0 = sc.r0 > 0.0 ? sc.r0 : model.bio().r;

  FlowOptions flow;
  flow.dt = sc.dt;
  flow.x_max = s.grid().hi();
  flow.sample_interval = sc.sample_interval;
  SimulationSetup setup{.model = model,
                        .rates = c.rates,
                        .kernel_x = c.rates.lambda_x > 0.0 ? c.kernels.biomass : std::nullopt,
                        .kernel_r = c.rates.lambda_r > 0.0 ? c.kernels.growth : std::nullopt,
                        .policy = s.policy,
                        .override_policy = std::nullopt,
                        .horizon = sc.horizon > 0.0 ? sc.horizon : default_horizon(model),
                        .flow = flow,
                        .r_lo = s.v2 ? s.v2->r_nodes.front() : 0.0,
                        .r_hi = s.v2 ? s.v2->r_nodes.back() : std::numeric_limits<double>::infinity(),
                        .clamp_fraction = c.solver.clamp_fraction};

  for (int k = 0; k < sc.trajectories; ++k) {
    const auto tr = simulate(setup, sc.x0, r0, replicate_seed(c.seed, static_cast<std::uint64_t>(k)));
    CsvWriter w(dir / ("trajectory_" + std::to_string(k) + ".csv"), c.hash, c.seed,
                {"time", "biomass", "growth_rate", "effort", "event_flag", "x_star_level"});
    for (std::size_t i = 0; i < tr.segments.size(); ++i) {
      const auto& seg = tr.segments[i];
      const double level = s.policy.threshold(seg.r);
      for (std::size_t k2 = 0; k2 < seg.samples.size(); ++k2) {
        const auto& smp = seg.samples[k2];
        const long long flag = (i > 0 && k2 == 0) ? 1 : 0;
        w.row({smp.t, smp.x, seg.r, smp.effort, flag, level});
      }
    }
  }

  setup.flow.record = false;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int threads = static_cast<int>(sc.threads > 0 ? sc.threads : hw);
  const auto est = monte_carlo_value(setup, sc.x0, r0, sc.replicates, c.seed, threads);
  const double v = s.value(sc.x0, r0);
  CsvWriter w(dir / "mc_summary.csv", c.hash, c.seed,
              {"x0", "r0", "replicates", "mean", "half_width", "sd", "truncation_bound", "horizon", "solver_value",
               "difference", "jumps", "clamped_jumps"});
  w.row({sc.x0, r0, static_cast<long long>(est.n), est.mean, est.half_width, est.sd, est.truncation_bound,
         setup.horizon, v, est.mean - v, static_cast<long long>(est.jumps), static_cast<long long>(est.clamped_jumps)});
  log << "monte carlo mean " << brief(est.mean) << " +- " << brief(est.half_width) << ", solver "
      << brief(v) << '\n';
  return kExitOk;
}

int cmd_sensitivity(const RunConfig& c, std::ostream& log) {
  const fs::path dir = prepare(c);
  const Model model = c.model();
  const auto& sc = c.sensitivity;

  struct Probe {
    std::string label;
    Model model;
    KernelSpec kernel;
  };
  std::vector<Probe> probes;
  for (double mean : sc.kernel_means) {
    probes.push_back({"asymmetric mean " + brief(mean), model,
                      KernelSpec::centered(sc.epsilon, DiscreteDistribution::two_point_mean(mean))});
  }
  for (double e_max : sc.e_max_regimes) {
    probes.push_back({"centered e_max " + brief(e_max), model.with_e_max(e_max),
                      KernelSpec::centered(sc.epsilon, DiscreteDistribution::two_point())});
  }
  if (c.kernels.biomass) probes.push_back({"configured biomass kernel", model, *c.kernels.biomass});

  {
    CsvWriter ladder(dir / "sensitivity_lambda.csv", c.hash, c.seed, {"kernel", "lambda", "x_star"});
    CsvWriter summary(dir / "sensitivity_summary.csv", c.hash, c.seed,
                      {"kernel", "e_max", "x_star", "flip_threshold", "slope", "slope_half_step", "noise",
                       "discriminant", "prediction", "resolved", "agree"});
    for (const auto& p : probes) {
      const auto rep = lambda_sensitivity(p.model, p.kernel, sc.lambda1, c.grid, c.solver);
      for (std::size_t k = 0; k < rep.lambdas.size(); ++k) ladder.row({p.label, rep.lambdas[k], rep.x_stars[k]});
      summary.row({p.label, p.model.econ().e_max, rep.x_stars.front(), flip_threshold(p.model), rep.slope_at_zero,
                   rep.slope_half_step, rep.noise, rep.discriminant, static_cast<long long>(rep.prediction),
                   static_cast<long long>(rep.resolved), static_cast<long long>(rep.agree)});
      log << p.label << ": slope " << brief(rep.slope_at_zero) << ", discriminant "
          << brief(rep.discriminant) << '\n';
    }
  }
  {
    CsvWriter w(dir / "discriminant_scaling.csv", c.hash, c.seed,
                {"distribution", "epsilon", "discriminant", "log_slope"});
    const std::pair<const char*, DiscreteDistribution> dists[] = {
        {"centered", DiscreteDistribution::two_point()},
        {"asymmetric", DiscreteDistribution::two_point_mean(sc.kernel_means.empty() ? 0.5 : sc.kernel_means.front())}};
    for (const auto& [name, d] : dists) {
      const auto rep = discriminant_scaling(model, d, sc.epsilon_list, c.grid);
      for (std::size_t k = 0; k < rep.scale.size(); ++k) {
        w.row({std::string(name), rep.scale[k], rep.discriminant[k], rep.log_slope});
      }
    }
  }
  {
    const auto rep = growth_sensitivity(model, sc.r_list, c.grid);
    CsvWriter w(dir / "growth_sensitivity.csv", c.hash, c.seed, {"r", "x_star"});
    for (std::size_t k = 0; k < rep.r.size(); ++k) w.row({rep.r[k], rep.x_star[k]});
  }
  {
    const auto rows = dual_sensitivity_table(model, sc.dual, c.solver);
    CsvWriter w(dir / "dual_sensitivity.csv", c.hash, c.seed,
                {"label", "channel", "r", "e_max", "singular_effort", "kernel_mean", "slope", "noise", "discriminant",
                 "slope_sign", "discriminant_sign", "predicted_sign", "status", "note"});
    for (const auto& r : rows) {
      w.row({r.label, r.channel, r.r, r.e_max, r.singular_effort, r.kernel_mean, r.slope, r.noise, r.discriminant,
             static_cast<long long>(r.slope_sign), static_cast<long long>(r.discriminant_sign),
             static_cast<long long>(r.predicted_sign), r.status, r.note});
    }
  }
  return kExitOk;
}

std::vector<VerifyRow> verify_rows(const RunConfig& c, std::ostream& log) {
  const Model model = c.model();
  const auto identity = KernelSpec::uniform(1.0, 1.0);
  std::vector<VerifyRow> rows;
  auto add = [&](VerifyRow row) {
    log << row.status << "  " << row.id << ": " << row.description << '\n';
    rows.push_back(std::move(row));
  };

  {
    const Solved s = solve(c, log);
    const double res = s.v1 ? s.v1->residual : s.v2->residual;
    add({"value_defect", "sup-norm defect of the value equation at interior nodes", res, 0.0, 1e-8,
         status(res < 1e-8)});
    const double lam = c.rates.total();
    if (lam > 0.0) {
      const double k = contraction_factor(s.v1 ? s.v1->gaps : s.v2->gaps);
      const double bound = lam / (c.econ.delta + lam) + 0.05;
      add({"contraction", "iterate gap ratio against lambda/(delta+lambda)", k, bound - 0.05, 0.05,
           status(k <= bound)});
    }
  }

  GridSpec coarse = c.grid;
  coarse.n = c.verify.n_smooth_fit;
  const auto r1 = regularity_check(solve_value_1d(model, identity, 0.0, coarse, c.solver), model);
  add({"smooth_fit", "one-sided V'' at x* against c/(q x*^2), spacing " + brief(r1.spacing),
       r1.smooth_fit_error, r1.m_prime_at_star, 0.05, status(r1.smooth_fit())});

  GridSpec fine = c.grid;
  fine.n = c.verify.n_fine;
  const auto r2 = regularity_check(solve_value_1d(model, identity, 0.0, fine, c.solver), model);
  add({"kink_signs", "[x^2 V'']' jumps from positive to negative at x* and Sigma(x*) > 0", r2.sigma_at_star, 0.0,
       0.0, status(r2.kink_signs())});
  add({"kink_left", "[x^2 V'']'(x*-) against x Sigma/(h0 E)", r2.j_left, r2.j_left_predicted, 0.1,
       status(r2.j_left_error < 0.1)});
  add({"kink_right", "[x^2 V'']'(x*+) against -x Sigma/(h0 (e_max - E))", r2.j_right, r2.j_right_predicted, 0.1,
       status(r2.j_right_error < 0.1)});

  const auto& sc = c.sensitivity;
  for (double mean : sc.kernel_means) {
    const auto rep = lambda_sensitivity(
        model, KernelSpec::centered(sc.epsilon, DiscreteDistribution::two_point_mean(mean)), sc.lambda1, c.grid,
        c.solver);
    const bool ok = rep.resolved && rep.agree && !rep.ambiguous &&
                    (rep.slope_at_zero > 0.0) == (mean > 0.0);
    add({"jump_mean_direction", "dx*/dlambda sign follows E[Z] = " + brief(mean), rep.slope_at_zero,
         rep.discriminant, rep.noise, status(ok)});
  }
  for (double e_max : sc.e_max_regimes) {
    const Model m = model.with_e_max(e_max);
    const auto rep = lambda_sensitivity(m, KernelSpec::centered(sc.epsilon, DiscreteDistribution::two_point()),
                                        sc.lambda1, c.grid, c.solver);
    const double thr = flip_threshold(m);
    const bool ok = rep.resolved && rep.agree && (rep.slope_at_zero > 0.0) == (rep.x_stars.front() > thr);
    add({"centered_direction", "centered kernel, e_max " + brief(e_max) + ": increasing iff x* > " +
                                   brief(thr),
         rep.slope_at_zero, thr, rep.noise, status(ok)});
  }
  {
    const auto rep = discriminant_scaling(model, DiscreteDistribution::two_point(), sc.epsilon_list, c.grid);
    add({"centered_order", "log-log slope of the centered discriminant in epsilon", rep.log_slope, 2.0, 0.2,
         status(std::abs(rep.log_slope - 2.0) < 0.2)});
  }
  {
    const auto rep = growth_sensitivity(model, sc.r_list, c.grid);
    add({"growth_monotone", "x*(r) strictly increasing over the r list", rep.x_star.back() - rep.x_star.front(), 0.0,
         0.0, status(rep.increasing)});
  }
  if (c.verify.dual) {
    const auto rep = dual_regularity_check(model, c.verify.dual_grid);
    double worst_xr = 0.0, worst_link = 0.0, worst_ratio = 0.0;
    bool xr = !rep.rows.empty(), signs = xr, link = xr;
    for (const auto& row : rep.rows) {
      worst_xr = std::max(worst_xr, std::abs(row.v_xr) / row.noise_v_xr);
      worst_link = std::max(worst_link, std::max(std::abs(row.linkage_left) / row.noise_linkage_left,
                                                 std::abs(row.linkage_right) / row.noise_linkage_right));
      worst_ratio = std::max(worst_ratio, row.ratio_error());
      xr = xr && row.v_xr_ok();
      signs = signs && row.signs_ok();
      link = link && row.linkage_ok();
    }
    add({"dual_mixed_zero", "|V_xr(x*(r), r)| over its noise floor, worst interior r", worst_xr, 0.0, 10.0,
         status(xr)});
    add({"dual_third_signs", "one-sided V_xxr negative below and positive above x*(r)", 0.0, 0.0, 0.0,
         status(signs)});
    add({"dual_linkage", "V_xxr x*' + V_xrr per side over its noise floor, worst interior r", worst_link, 0.0, 10.0,
         status(link)});
    add({"dual_sigma1", "one-sided V_xxr against -Sigma1/E and Sigma1/(e_max - E), worst relative error",
         worst_ratio, 0.0, 0.1, status(worst_ratio < 0.1)});
    for (const auto& row : dual_sensitivity_table(model, sc.dual, c.solver)) {
      add({"dual_" + row.channel, row.label + " (E[.]=" + brief(row.kernel_mean) + ", " + row.note + ")",
           row.slope, row.discriminant, row.noise, row.status});
    }
  }
  return rows;
}

int cmd_verify(const RunConfig& c, std::ostream& log) {
  const fs::path dir = prepare(c);
  const auto rows = verify_rows(c, log);
  CsvWriter w(dir / "verify_report.csv", c.hash, c.seed,
              {"id", "description", "value", "reference", "tolerance", "status"});
  bool failed = false;
  for (const auto& r : rows) {
    w.row({r.id, r.description, r.value, r.reference, r.tolerance, r.status});
    failed = failed || r.status == "FAIL";
  }
  return failed ? kExitVerificationFailure : kExitOk;
}

int run_command(const std::string& name, const RunConfig& c, std::ostream& log, std::ostream& err) {
  try {
    if (name == "solve") return cmd_solve(c, log);
    if (name == "simulate") return cmd_simulate(c, log);
    if (name == "sensitivity") return cmd_sensitivity(c, log);
    if (name == "verify") return cmd_verify(c, log);
    err << "unknown command '" << name << "'\n";
    return kExitConfigError;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    const auto& gaps = e.gaps();
    const std::size_t from = gaps.size() > 10 ? gaps.size() - 10 : 0;
    for (std::size_t k = from; k < gaps.size(); ++k) {
      err << "  sweep " << k + 1 << " gap " << brief(gaps[k]) << '\n';
    }
    try {
      write_gaps(c, gaps);
    } catch (const std::exception&) {
    }
    return kExitNonConvergence;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace harvest
