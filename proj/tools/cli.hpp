#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chsh::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line. args[0] is the program name. Output written to "-"
/// goes to `out`; diagnostics go to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chsh::cli
