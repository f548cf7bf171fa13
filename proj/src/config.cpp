#include "harvest/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "harvest/error.hpp"
#include "json.hpp"

namespace harvest {

namespace {

using nlohmann::json;

/// Reads keys from one JSON object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(name_ + "." + key + ": " + e.what());
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return name_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(name_ + ": unknown key '" + item.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

DiscreteDistribution parse_distribution(const json& j, const std::string& name) {
  Section s(j, name);
  DiscreteDistribution d = DiscreteDistribution::two_point();
  if (s.has("mean")) {
    double mean = 0.0;
    s.get("mean", mean);
    d = DiscreteDistribution::two_point_mean(mean);
  }
  s.get("support", d.support);
  s.get("weights", d.weights);
  s.get("asymmetric", d.asymmetric);
  s.finish();
  return d;
}

KernelSpec parse_kernel(const json& j, const std::string& name) {
  Section s(j, name);
  std::string kind;
  s.get("kind", kind);
  DiscreteDistribution dist = DiscreteDistribution::two_point();
  if (s.has("distribution")) dist = parse_distribution(s.at("distribution"), s.path("distribution"));
  if (kind == "uniform") {
    double lo = 1.0;
    double hi = 1.0;
    int nodes = 64;
    s.get("z_lo", lo);
    s.get("z_hi", hi);
    s.get("nodes", nodes);
    s.finish();
    return KernelSpec::uniform(lo, hi, nodes);
  }
  if (kind == "centered") {
    double eps = 0.0;
    s.get("epsilon", eps);
    s.finish();
    return KernelSpec::centered(eps, dist);
  }
  if (kind == "growth") {
    double xi = 0.0;
    s.get("xi", xi);
    s.finish();
    return KernelSpec::growth(xi, dist);
  }
  throw ConfigError(name + ".kind: expected uniform, centered or growth, got '" + kind + "'");
}

void parse_grid(Section& s, GridSpec& g) {
  s.get("n", g.n);
  s.get("x_min_frac", g.x_min_frac);
  s.get("x_max", g.x_max);
  s.get("grading_frac", g.grading_frac);
  s.get("n_r", g.n_r);
  s.get("r_lo_frac", g.r_lo_frac);
  s.get("r_hi_frac", g.r_hi_frac);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse(const json& root) {
  RunConfig c;
  Section top(root, "config");
  if (top.has("model")) {
    Section s(top.at("model"), "model");
    s.get("r", c.bio.r);
    s.get("K", c.bio.K);
    s.get("p", c.econ.p);
    s.get("q", c.econ.q);
    s.get("c", c.econ.c);
    s.get("delta", c.econ.delta);
    s.get("e_max", c.econ.e_max);
    s.finish();
  }
  if (top.has("rates")) {
    Section s(top.at("rates"), "rates");
    s.get("lambda_x", c.rates.lambda_x);
    s.get("lambda_r", c.rates.lambda_r);
    s.finish();
  }
  if (top.has("kernels")) {
    Section s(top.at("kernels"), "kernels");
    if (s.has("biomass")) c.kernels.biomass = parse_kernel(s.at("biomass"), "kernels.biomass");
    if (s.has("growth")) c.kernels.growth = parse_kernel(s.at("growth"), "kernels.growth");
    s.finish();
    if (c.kernels.growth && c.kernels.growth->kind() != KernelKind::growth) {
      throw ConfigError("kernels.growth: kind must be growth");
    }
    if (c.kernels.biomass && c.kernels.biomass->kind() == KernelKind::growth) {
      throw ConfigError("kernels.biomass: kind must be uniform or centered");
    }
  }
  if (top.has("solver")) {
    Section s(top.at("solver"), "solver");
    parse_grid(s, c.grid);
    s.get("tol", c.solver.tol);
    s.get("max_iter", c.solver.max_iter);
    s.get("root_tol", c.solver.root_tol);
    s.get("clamp_fraction", c.solver.clamp_fraction);
    s.finish();
  }
  if (top.has("simulate")) {
    Section s(top.at("simulate"), "simulate");
    auto& m = c.simulate;
    s.get("x0", m.x0);
    s.get("r0", m.r0);
    s.get("horizon", m.horizon);
    s.get("replicates", m.replicates);
    s.get("trajectories", m.trajectories);
    s.get("dt", m.dt);
    s.get("sample_interval", m.sample_interval);
    s.get("threads", m.threads);
    s.finish();
  }
  if (top.has("sensitivity")) {
    Section s(top.at("sensitivity"), "sensitivity");
    auto& m = c.sensitivity;
    s.get("lambda1", m.lambda1);
    s.get("epsilon", m.epsilon);
    s.get("epsilon_list", m.epsilon_list);
    s.get("kernel_means", m.kernel_means);
    s.get("e_max_regimes", m.e_max_regimes);
    s.get("r_list", m.r_list);
    if (s.has("dual")) {
      Section d(s.at("dual"), "sensitivity.dual");
      auto& st = m.dual;
      d.get("epsilon", st.epsilon);
      d.get("xi", st.xi);
      d.get("rate1_x", st.rate1_x);
      d.get("rate1_r", st.rate1_r);
      d.get("centered_e_max", st.centered_e_max);
      d.get("mean_flip_asserted", st.mean_flip_asserted);
      d.get("mean_flip_reported", st.mean_flip_reported);
      parse_grid(d, st.grid);
      d.finish();
    }
    s.finish();
  }
  if (top.has("verify")) {
    Section s(top.at("verify"), "verify");
    s.get("n_smooth_fit", c.verify.n_smooth_fit);
    s.get("n_fine", c.verify.n_fine);
    s.get("dual", c.verify.dual);
    if (s.has("dual_grid")) {
      Section g(s.at("dual_grid"), "verify.dual_grid");
      parse_grid(g, c.verify.dual_grid);
      g.finish();
    }
    s.finish();
  }
  top.get("seed", c.seed);
  std::string out = c.output_dir.string();
  top.get("output_dir", out);
  c.output_dir = out;
  top.finish();

  try {
    (void)c.model();
    c.rates.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.rates.lambda_x > 0.0 && !c.kernels.biomass) throw ConfigError("rates.lambda_x > 0 needs kernels.biomass");
  if (c.rates.lambda_r > 0.0 && !c.kernels.growth) throw ConfigError("rates.lambda_r > 0 needs kernels.growth");
  if (c.simulate.replicates < 2) throw ConfigError("simulate.replicates must be >= 2");
  if (c.simulate.trajectories < 0) throw ConfigError("simulate.trajectories must be >= 0");
  if (!(c.simulate.dt > 0.0)) throw ConfigError("simulate.dt must be > 0");
  if (!(c.sensitivity.lambda1 > 0.0)) throw ConfigError("sensitivity.lambda1 must be > 0");

  json canonical = root;
  canonical.erase("seed");
  canonical.erase("output_dir");
  c.hash = fnv1a_hex(canonical.dump());
  return c;
}

}  // namespace

KernelSpec RunConfig::biomass_kernel() const {
  return kernels.biomass ? *kernels.biomass : KernelSpec::uniform(1.0, 1.0);
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse(root);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace harvest
