#ifndef FSEL_CLI_HPP
#define FSEL_CLI_HPP

#include <string>
#include <vector>

namespace fsel {

/// Command-line driver. Exit codes: 0 success, 1 usage error, 2 data or
/// format error. Every subcommand writes a run manifest (flags, seeds, input
/// and output checksums) beside its primary output.
int run_cli(const std::vector<std::string>& args);

}  // namespace fsel

#endif
