#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "harvest/commands.hpp"
#include "harvest/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimal harvesting under piecewise deterministic jumps"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  const char* commands[][2] = {
      {"solve", "Solve the value equation and write the value function and critical value"},
      {"simulate", "Simulate closed-loop trajectories and a Monte Carlo value estimate"},
      {"sensitivity", "Tabulate critical-value sensitivities to the jump rates and growth rate"},
      {"verify", "Run every regularity and sensitivity check and write a PASS/FAIL table"},
  };
  std::vector<CLI::Option*> seed_opts;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--output-dir", output_dir, "Directory for the CSV outputs");
    seed_opts.push_back(sub->add_option("--seed", seed, "Master random seed"));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return harvest::kExitConfigError;
  }

  harvest::RunConfig config;
  try {
    config = harvest::load_config(config_path);
  } catch (const harvest::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return harvest::kExitConfigError;
  }
  if (!output_dir.empty()) config.output_dir = output_dir;
  for (auto* opt : seed_opts) {
    if (opt->count() > 0) config.seed = seed;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  return harvest::run_command(name, config, std::cout, std::cerr);
}
