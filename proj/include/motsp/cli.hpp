#pragma once

#include <string>
#include <vector>

namespace motsp {

/// Command-line entry point (subcommands: gen, train, solve, benchmark, hv,
/// export). Returns 0 on success, 2 on usage/configuration errors, 1 on
/// runtime failures.
int run_cli(const std::vector<std::string>& args);

}  // namespace motsp
