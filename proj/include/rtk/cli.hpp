#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace rtk {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,     ///< config, dataset, decode or I/O problem
    kExitTransport = 3,  ///< classifier unreachable or protocol violation
    kExitBelowMin = 4,   ///< --min-score given and some score fell below it
};

/// Entry point for the `rtk` executable; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace rtk
