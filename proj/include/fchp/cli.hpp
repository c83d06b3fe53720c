#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fchp::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,  // infeasible or unsolvable input, broken files
};

/// Runs one `fchp` command line (args exclude the program name).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, char** argv);

}  // namespace fchp::cli
