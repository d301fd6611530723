#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace loghold {

/// Exit codes of the command-line tool.
inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;  ///< configuration or I/O error
inline constexpr int kExitIndeterminate = 2;
inline constexpr int kExitFail = 3;

/// Runs the tool on argv-style arguments (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace loghold
