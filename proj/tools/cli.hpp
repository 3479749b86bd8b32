#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gpfractal::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kNumerical = 3 };

/// Runs one command line (args exclude the program name). Diagnostics go to err, the list of
/// written files to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gpfractal::cli
