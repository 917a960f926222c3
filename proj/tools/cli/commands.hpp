#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reamot::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kInputError = 2,
  kEmptyEvaluation = 3,
};

// Runs the `reamot` command line. argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reamot::cli
