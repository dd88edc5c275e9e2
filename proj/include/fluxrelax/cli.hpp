#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fluxrelax::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Runs one command line (without the program name). Results go to `out`
/// unless an output path is given; diagnostics and error JSON go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fluxrelax::cli
