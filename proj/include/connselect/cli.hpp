#pragma once

#include <string>
#include <vector>

namespace connselect {

/// Command-line entry point. `args[0]` is the program name.
/// Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace connselect
