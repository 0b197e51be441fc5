#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace aopbip {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitParse = 2,
    kExitValidate = 3,
    kExitWeave = 4,
    kExitConformance = 5,
};

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aopbip
