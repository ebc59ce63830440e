#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seqhop::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kIoError = 3,
    kNumericsError = 4,
};

/// Runs the command line `seqhop <args...>` (args excludes the program
/// name). Summaries go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace seqhop::cli
