#pragma once

#include <cstdint>
#include <string>

namespace maslov {

/// Settings shared by the batch commands.  Defaults match the --help text.
struct CommandOptions {
  double tol = 1e-8;       // agreement threshold for cross-checks
  int steps = 64;          // trace samples for evolve
  int trunc = 0;           // oscillator cutoff for the evolve oracle; 0 skips it
  int grid = 16;           // Gauss-Hermite nodes per axis for the oracle
  std::uint64_t seed = 1;  // oracle-compare instance stream
  int count = -1;          // oracle-compare instances; -1 means 20 without a file
  double t = 1.0;          // evolve end time
  int bound = 2;           // spectrum: largest total occupation
  std::string format = "json";
  std::string other;       // equiv: file holding the second Gaussian
};

struct CommandResult {
  int exit_code = 0;  // 0 success, 1 validation failure, 2 numerical failure
  std::string output;
};

/// Runs one subcommand on a system file (empty path allowed for
/// oracle-compare).  Never throws; failures become a JSON error report.
CommandResult run_command(const std::string& command, const std::string& path, const CommandOptions& opt);

}  // namespace maslov
