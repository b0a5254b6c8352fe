#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace apm::cli {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitStrict = 2;   // warnings escalated by --strict
constexpr int kExitUsage = 64;

/// Parses `args` (without the program name) and runs the subcommand.
/// Human-readable output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace apm::cli
