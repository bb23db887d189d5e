#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gsc::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNonConverged = 2, kSingular = 3 };

/// Runs `gscinfer` with argv-style arguments (args[0] is the program name).
/// Diagnostics go to `err`; results go to --out or `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Splices the keys of a --config JSON object into the argument list as
/// "--key value" right after the subcommand, so explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace gsc::cli
