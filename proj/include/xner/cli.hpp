#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xner {

/// Runs one subcommand. `args` excludes the program name. Returns the process
/// exit code: 0 success, 1 usage or configuration error, 2 data error,
/// 3 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xner
