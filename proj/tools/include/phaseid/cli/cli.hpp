#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phaseid::cli {

/// Process exit codes. Stable contract for scripts.
enum ExitCode : int {
    kSuccess = 0,
    kIoOrParse = 1,
    kInsufficientData = 2,  ///< also solver divergence for `simulate`
    kLowMargin = 3,
};

/// Runs the command line `args` (without the program name). Reports go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phaseid::cli
