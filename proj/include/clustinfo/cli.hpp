#pragma once

#include <iosfwd>

namespace clustinfo {

/// Exit codes of the command-line driver.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitData = 3,
    kExitCompute = 4,
};

/// Entry point of the `clustinfo` tool, callable in-process.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace clustinfo
