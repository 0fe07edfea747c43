#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace agvsl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitUsageError = 2;

/// Command-line front end. `args` excludes the program name. Subcommands:
/// run, sweep, validate. Returns 0 on success, 1 on a runtime error and 2
/// on a usage error (bad flag, invalid value, unreadable config).
int CliMain (const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace agvsl
