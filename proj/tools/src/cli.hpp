#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mechforce::cli {

/// Entry point of the `mechforce` tool; `args` excludes the program name.
/// Exit codes: 0 pass, 1 analytic failure or mismatch, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace mechforce::cli
