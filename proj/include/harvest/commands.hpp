#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "harvest/config.hpp"

namespace harvest {

enum ExitCode : int {
  kExitOk = 0,
  kExitNonConvergence = 2,
  kExitVerificationFailure = 3,
  kExitConfigError = 4,
};

struct VerifyRow {
  std::string id;
  std::string description;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  std::string status;  ///< PASS, FAIL or REPORT-ONLY
};

/// Each command writes its CSV files under config.output_dir and returns an exit code.
int cmd_solve(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_sensitivity(const RunConfig& config, std::ostream& log);
int cmd_verify(const RunConfig& config, std::ostream& log);

/// Verification table without writing files.
std::vector<VerifyRow> verify_rows(const RunConfig& config, std::ostream& log);

/// Dispatches by name and maps library errors to exit codes.
int run_command(const std::string& name, const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace harvest
