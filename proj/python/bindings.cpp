#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "harvest/analysis.hpp"
#include "harvest/commands.hpp"
#include "harvest/error.hpp"
#include "harvest/simulator.hpp"

namespace py = pybind11;
using namespace harvest;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<double> to_array(std::span<const double> v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<double> to_matrix(const std::vector<std::vector<double>>& rows) {
  const std::size_t nr = rows.size();
  const std::size_t nc = nr ? rows.front().size() : 0;
  py::array_t<double> out({nr, nc});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t j = 0; j < nr; ++j) {
    for (std::size_t i = 0; i < nc; ++i) m(j, i) = rows[j][i];
  }
  return out;
}

py::tuple run(const std::string& command, const RunConfig& config) {
  std::ostringstream log, err;
  const int code = run_command(command, config, log, err);
  return py::make_tuple(code, log.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(pdmp_harvest, m) {
  m.doc() = "Optimal harvesting with piecewise deterministic jumps";

  auto base = py::register_exception<Error>(m, "HarvestError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<ClampOverflowError>(m, "ClampOverflowError", base.ptr());
  py::register_exception<CriticalValueError>(m, "CriticalValueError", base.ptr());
  py::register_exception<FlowError>(m, "FlowError", base.ptr());

  py::class_<Model>(m, "Model")
      .def(py::init([](double r, double K, double p, double q, double c, double delta, double e_max) {
             return Model(BioParams{r, K}, EconParams{p, q, c, delta, e_max});
           }),
           py::kw_only(), py::arg("r") = 1.0, py::arg("K") = 1.0, py::arg("p") = 2.0, py::arg("q") = 1.0,
           py::arg("c") = 1.0, py::arg("delta") = 0.05, py::arg("e_max") = 1.0)
      .def_property_readonly("r", [](const Model& s) { return s.bio().r; })
      .def_property_readonly("K", [](const Model& s) { return s.bio().K; })
      .def_property_readonly("p", [](const Model& s) { return s.econ().p; })
      .def_property_readonly("q", [](const Model& s) { return s.econ().q; })
      .def_property_readonly("c", [](const Model& s) { return s.econ().c; })
      .def_property_readonly("delta", [](const Model& s) { return s.econ().delta; })
      .def_property_readonly("e_max", [](const Model& s) { return s.econ().e_max; })
      .def("with_growth_rate", &Model::with_growth_rate)
      .def("with_e_max", &Model::with_e_max)
      .def("with_discount", &Model::with_discount)
      .def("growth", [](const Model& s, double x, double r) { return s.growth(x, r).g; }, py::arg("x"),
           py::arg("r"))
      .def("singular_effort", py::overload_cast<double, double>(&Model::singular_effort, py::const_), py::arg("x"),
           py::arg("r"))
      .def("break_even_biomass", &Model::break_even_biomass);

  py::class_<DiscreteDistribution>(m, "DiscreteDistribution")
      .def(py::init([](std::vector<double> support, std::vector<double> weights, bool asymmetric) {
             DiscreteDistribution d{std::move(support), std::move(weights), asymmetric};
             d.validate();
             return d;
           }),
           py::arg("support"), py::arg("weights"), py::arg("asymmetric") = false)
      .def_static("two_point", &DiscreteDistribution::two_point)
      .def_static("two_point_mean", &DiscreteDistribution::two_point_mean, py::arg("mean"))
      .def_readonly("support", &DiscreteDistribution::support)
      .def_readonly("weights", &DiscreteDistribution::weights)
      .def("mean", &DiscreteDistribution::mean);

  py::class_<KernelSpec>(m, "KernelSpec")
      .def_static("uniform", &KernelSpec::uniform, py::arg("z_lo"), py::arg("z_hi"), py::arg("nodes") = 64)
      .def_static("centered", &KernelSpec::centered, py::arg("epsilon"),
                  py::arg("distribution") = DiscreteDistribution::two_point())
      .def_static("growth", &KernelSpec::growth, py::arg("xi"),
                  py::arg("distribution") = DiscreteDistribution::two_point())
      .def("mean_multiplier", &KernelSpec::mean_multiplier)
      .def("is_identity", &KernelSpec::is_identity);

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_readwrite("n", &GridSpec::n)
      .def_readwrite("x_min_frac", &GridSpec::x_min_frac)
      .def_readwrite("x_max", &GridSpec::x_max)
      .def_readwrite("grading_frac", &GridSpec::grading_frac)
      .def_readwrite("n_r", &GridSpec::n_r)
      .def_readwrite("r_lo_frac", &GridSpec::r_lo_frac)
      .def_readwrite("r_hi_frac", &GridSpec::r_hi_frac);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("tol", &SolverOptions::tol)
      .def_readwrite("max_iter", &SolverOptions::max_iter)
      .def_readwrite("root_tol", &SolverOptions::root_tol);

  py::class_<ValueGrid>(m, "ValueGrid")
      .def_property_readonly("x", [](const ValueGrid& v) { return to_array(v.grid->nodes()); })
      .def_property_readonly("v", [](const ValueGrid& v) { return to_array(v.v); })
      .def_property_readonly("v_prime", [](const ValueGrid& v) { return to_array(v.v_prime); })
      .def_readonly("x_star", &ValueGrid::x_star)
      .def_readonly("residual", &ValueGrid::residual)
      .def_readonly("iterations", &ValueGrid::iterations)
      .def_readonly("lam", &ValueGrid::lambda)
      .def_property_readonly("gaps", [](const ValueGrid& v) { return to_array(v.gaps); })
      .def("__call__", [](const ValueGrid& v, double x) { return v.function()(x); }, py::arg("x"))
      .def("derivative", [](const ValueGrid& v, double x) { return v.function().derivative(x); }, py::arg("x"));

  py::class_<ValueGrid2D>(m, "ValueGrid2D")
      .def_property_readonly("x", [](const ValueGrid2D& v) { return to_array(v.grid->nodes()); })
      .def_property_readonly("r", [](const ValueGrid2D& v) { return to_array(v.r_nodes); })
      .def_property_readonly("v", [](const ValueGrid2D& v) { return to_matrix(v.v); })
      .def_property_readonly("v_x", [](const ValueGrid2D& v) { return to_matrix(v.v_x); })
      .def_property_readonly("x_star", [](const ValueGrid2D& v) { return to_array(v.x_star); })
      .def_readonly("residual", &ValueGrid2D::residual)
      .def_readonly("iterations", &ValueGrid2D::iterations)
      .def("__call__", [](const ValueGrid2D& v, double x, double r) { return ValueSurface(v)(x, r); },
           py::arg("x"), py::arg("r"));

  m.def("solve_value_1d", &solve_value_1d, py::arg("model"), py::arg("kernel") = KernelSpec::uniform(1.0, 1.0),
        py::arg("lam") = 0.0, py::arg("grid") = GridSpec{}, py::arg("options") = SolverOptions{},
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "solve_value_2d",
      [](const Model& model, std::optional<KernelSpec> biomass, std::optional<KernelSpec> growth, double lambda_x,
         double lambda_r, const GridSpec& grid, const SolverOptions& options) {
        return solve_value_2d(model, Kernels2D{std::move(biomass), std::move(growth)}, JumpRates{lambda_x, lambda_r},
                              grid, options);
      },
      py::arg("model"), py::arg("biomass_kernel") = py::none(), py::arg("growth_kernel") = py::none(),
      py::arg("lambda_x") = 0.0, py::arg("lambda_r") = 0.0, py::arg("grid") = GridSpec{},
      py::arg("options") = SolverOptions{}, py::call_guard<py::gil_scoped_release>());
  m.def("contraction_factor", [](const std::vector<double>& gaps) { return contraction_factor(gaps); });

  py::class_<RegularityReport>(m, "RegularityReport")
      .def_readonly("x_star", &RegularityReport::x_star)
      .def_readonly("v2_left", &RegularityReport::v2_left)
      .def_readonly("v2_right", &RegularityReport::v2_right)
      .def_readonly("m_prime_at_star", &RegularityReport::m_prime_at_star)
      .def_readonly("j_left", &RegularityReport::j_left)
      .def_readonly("j_right", &RegularityReport::j_right)
      .def_readonly("j_left_predicted", &RegularityReport::j_left_predicted)
      .def_readonly("j_right_predicted", &RegularityReport::j_right_predicted)
      .def_readonly("sigma_at_star", &RegularityReport::sigma_at_star)
      .def_readonly("smooth_fit_error", &RegularityReport::smooth_fit_error)
      .def_readonly("spacing", &RegularityReport::spacing)
      .def("smooth_fit", &RegularityReport::smooth_fit, py::arg("tol") = 0.05)
      .def("kink_signs", &RegularityReport::kink_signs)
      .def("kink_ratios", &RegularityReport::kink_ratios, py::arg("tol") = 0.10);
  m.def("regularity_check", &regularity_check, py::arg("value"), py::arg("model"));

  py::class_<SensitivityReport>(m, "SensitivityReport")
      .def_readonly("lambdas", &SensitivityReport::lambdas)
      .def_readonly("x_stars", &SensitivityReport::x_stars)
      .def_readonly("slope", &SensitivityReport::slope_at_zero)
      .def_readonly("slope_half_step", &SensitivityReport::slope_half_step)
      .def_readonly("noise", &SensitivityReport::noise)
      .def_readonly("discriminant", &SensitivityReport::discriminant)
      .def_readonly("prediction", &SensitivityReport::prediction)
      .def_readonly("resolved", &SensitivityReport::resolved)
      .def_readonly("agree", &SensitivityReport::agree);
  m.def("lambda_sensitivity", &lambda_sensitivity, py::arg("model"), py::arg("kernel"), py::arg("lambda1"),
        py::arg("grid") = GridSpec{}, py::arg("options") = SolverOptions{}, py::call_guard<py::gil_scoped_release>());
  m.def("flip_threshold", &flip_threshold, py::arg("model"));
  m.def(
      "growth_sensitivity",
      [](const Model& model, const std::vector<double>& r_list, const GridSpec& grid) {
        return growth_sensitivity(model, r_list, grid).x_star;
      },
      py::arg("model"), py::arg("r_list"), py::arg("grid") = GridSpec{});

  m.def(
      "monte_carlo_value",
      [](const Model& model, const ValueGrid& v, std::optional<KernelSpec> kernel, double x0, long replicates,
         std::uint64_t seed, int threads) {
        FlowOptions flow;
        flow.x_max = v.grid->hi();
        flow.record = false;
        const SimulationSetup s{.model = model,
                                .rates = {v.lambda, 0.0},
                                .kernel_x = std::move(kernel),
                                .kernel_r = std::nullopt,
                                .policy = policy_from_value(v.x_star, model),
                                .override_policy = std::nullopt,
                                .horizon = default_horizon(model),
                                .flow = flow};
        py::gil_scoped_release release;
        const auto est = monte_carlo_value(s, x0, model.bio().r, replicates, seed, threads);
        return std::make_tuple(est.mean, est.half_width, est.truncation_bound);
      },
      py::arg("model"), py::arg("value"), py::arg("kernel") = py::none(), py::arg("x0") = 0.5,
      py::arg("replicates") = 1000, py::arg("seed") = 42, py::arg("threads") = 1,
      "Returns (mean, 95% half-width, truncation bound) of the discounted gain under the threshold policy of value.");

  py::class_<RunConfig>(m, "RunConfig")
      .def_readonly("hash", &RunConfig::hash)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def("model", &RunConfig::model);
  m.def("parse_config", &parse_config, py::arg("json_text"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("run_command", &run, py::arg("command"), py::arg("config"),
        "Runs solve, simulate, sensitivity or verify; returns (exit_code, log, errors).");
}
