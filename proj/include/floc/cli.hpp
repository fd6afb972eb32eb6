#pragma once

#include <string>
#include <vector>

namespace floc {

// Full command-line entry point minus the program name; returns the process
// exit code (0 ok, 2 parse/config problem, 3 numerical failure).
int run_cli(std::vector<std::string> args);

}  // namespace floc
