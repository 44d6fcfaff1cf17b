#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Runs the command line `args` (without the program name). Files go to the
/// output directory; messages to `out` and `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tc::cli
