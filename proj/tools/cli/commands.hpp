#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spherestat::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitNetwork = 3,
    kExitCompute = 4,
};

/// Runs one command line (args excludes the program name). Results go to
/// `out` unless an output file is named; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace spherestat::cli
