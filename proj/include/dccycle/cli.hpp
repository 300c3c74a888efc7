#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dccycle {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitSuccess = 0, kExitUsage = 1, kExitFailure = 2 };

/// Runs the command line `args` (without the program name). Subcommands:
/// train, evaluate, ablate, sweep, figures, make-toy-data.
int cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dccycle
