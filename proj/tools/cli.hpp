#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ampcg::cli {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kSuccess = 0,
  kInputError = 1,
  kNotConverged = 2,
};

/// Runs one command (`fit`, `simulate`, `identify`, `check-graph`).
/// args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ampcg::cli
