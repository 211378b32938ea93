#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bnmf {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitData = 3,
    kExitNumerical = 4,
};

/// Entry point of the `bnmf` tool. `args` excludes the program name.
///
/// Errors are reported as a single line `error[<kind>]: <reason>` on `err`,
/// where kind is one of config, data, numerical.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace bnmf
