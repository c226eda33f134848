#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pfc::cli {

// Runs one command-line invocation. `args` excludes the program name.
// Reports go to `out`, diagnostics to `err`. Returns the process exit code:
// 0 success, 1 usage/input error, 2 analysis failure (no-fit, instability,
// failed certification, unstabilized sentence, structural violations).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pfc::cli
