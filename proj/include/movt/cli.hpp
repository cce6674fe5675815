#pragma once

#include <string>
#include <vector>

namespace movt::cli {

// Command-line entry point (the movt binary is a thin wrapper around this).
// Never throws; every failure is printed to stderr and mapped to the exit
// code contract: 0 success, 2 config error (including bad flags), 3 data or
// io error, 4 numeric fault.
int run(int argc, const char* const* argv);

// Same, for in-process callers: args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace movt::cli
