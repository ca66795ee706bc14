#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace propas::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kSchema = 2,
  kNumerical = 3,
  kEmptyAfterGate = 4,
};

/// Runs one `propas` invocation. `args` excludes the program name.
/// Results go to files named on the command line, summaries to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace propas::cli
