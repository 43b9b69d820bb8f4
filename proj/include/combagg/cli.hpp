#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace combagg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // solver failure, cap hit, failed check
inline constexpr int kExitUsage = 2;    // bad flags, bad input files

// Logs go to stderr; AGG_LOG (trace, debug, info, warn, err, off) sets the level.
void configure_logging();

// Runs one command line (program name excluded) and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace combagg::cli
