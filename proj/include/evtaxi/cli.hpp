#pragma once

#include <string>
#include <vector>

namespace evtaxi {

// Subcommands: site, extract, gen-demand, simulate, sweep.
// Exit codes: 0 success, 1 partial sweep failure, 2 invalid input.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace evtaxi
