#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lindley::cli {

inline constexpr const char* kSchemaVersion = "1.0";

enum ExitCode : int { kOk = 0, kBadInput = 2, kInvariantBreach = 3, kCompareFail = 4 };

/// Runs the command line `lindley <args...>` (args excludes the program name). Data goes
/// to out unless --out names a file; diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lindley::cli
