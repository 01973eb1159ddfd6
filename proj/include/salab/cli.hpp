#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace salab {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,
    kExitConfig = 2,
    kExitViolation = 3,
};

/// Entry point of the sa_lab tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace salab
