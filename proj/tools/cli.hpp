#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ivdr::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 2,
    kComputationError = 3,
    kIoError = 4,
};

/// Runs one command line (without the program name). Results go to files
/// under --out; a short summary goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ivdr::cli
