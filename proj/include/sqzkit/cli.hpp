#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sqz {

/// Exit codes: 0 success, 1 validation or usage error, 2 numerical failure.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2 };

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sqz
