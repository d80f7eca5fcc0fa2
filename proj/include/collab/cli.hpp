#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace collab {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

/// Runs one subcommand (threshold, regions, solve, crb-curve, simulate,
/// reproduce-fig6). args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

} // namespace collab
