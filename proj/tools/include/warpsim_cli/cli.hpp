#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace warpsim::cli {

enum ExitCode { kOk = 0, kUsage = 1, kInvalid = 2, kMismatch = 3 };

/// Runs the command line `args` (without the program name). The report goes
/// to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace warpsim::cli
