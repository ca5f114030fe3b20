#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hawkesbg::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 1,        // bad flags or unparsable input files
    kConvergenceFlag = 2,   // finished, but an optimizer hit its cap
    kValidationFailure = 3, // inputs parsed but are inconsistent or invalid
};

// Runs the command line `args` (args[0] is the program name). Normal output
// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hawkesbg::cli
