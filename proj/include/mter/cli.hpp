#pragma once

#include <string>
#include <vector>

namespace mter {

// Entry point for the mter command-line tool. `args` excludes the program
// name. Returns the process exit code: 0 on success, 2 on usage errors,
// 1 on runtime failures.
int run_command(const std::vector<std::string>& args);

}  // namespace mter
