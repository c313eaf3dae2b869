#pragma once

#include <string>
#include <vector>

namespace pixmotion {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,      // bad flags or config file
  kExitIo = 3,         // unreadable / malformed inputs, unwritable outputs
  kExitNumerical = 4,  // degenerate geometry, rank-deficient problems
  kExitFrames = 5,     // estimate: more than 10% of frames failed
};

// Entry point of the `pixmotion` tool; argv[1] selects the subcommand.
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace pixmotion
