#pragma once

#include <ostream>

namespace logkg {

/// Process exit codes of the command-line tool.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int solver_failure = 1;
inline constexpr int check_failed = 2;
inline constexpr int blowup = 3;
inline constexpr int usage = 64;
inline constexpr int bad_data = 65;
}  // namespace exit_code

inline constexpr const char* kToolVersion = "0.1.0";

/// Entry point shared by the executable and the tests. Subcommands:
/// groundstate, evolve, check, plotdata.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace logkg
