#pragma once

#include <iosfwd>

namespace bitml {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitNotVerified = 1, kExitError = 2 };

/// Entry point of the `bitml` tool: check, simulate, replay, states, bench.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bitml
