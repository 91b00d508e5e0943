#pragma once

#include <string>
#include <vector>

namespace aet {

/// Command-line driver: subcommands phantom, forward, reconstruct, diagnose,
/// render. Returns 0 on success, 1 on usage/configuration errors, 2 on
/// numerical failures.
int cli_main(const std::vector<std::string>& args);
int cli_main(int argc, char** argv);

} // namespace aet
