#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace aapcd::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 1,
    exit_divergence = 2,
    exit_violations = 3,
};

/// Runs `aapcd <args...>`; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace aapcd::cli
