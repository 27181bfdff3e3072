#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ctp::cli {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 2 on usage errors and 1 on domain errors; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace ctp::cli
