#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aos::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kInsufficientData = 4 };

/// Runs `aosrefine` with the given arguments (program name excluded) and
/// returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aos::cli
