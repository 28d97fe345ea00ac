#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace medoidnet {

enum ExitCode : int { kExitOk = 0, kExitDomain = 1, kExitIo = 2 };

/// Runs one command line (without the program name). Commands: train,
/// predict, experiment, bound, net-dump, validate-space.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace medoidnet
