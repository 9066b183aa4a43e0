#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kct::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  kInternal = 1,
  kUsage = 2,
  kData = 3,
  kNumerical = 4,
};

// Runs the command line `args` (without the program name), writing reports
// to `out` and diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kct::cli
