#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bankrun::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kNonConvergence = 2 };

/// Runs the command line given as argv (args[0] is the program name). Results go to out,
/// diagnostics and warnings to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "0.5:0.99:0.01" (inclusive range) or "0.8,0.85,0.9".
std::vector<double> parse_grid(const std::string& text);

}  // namespace bankrun::cli
