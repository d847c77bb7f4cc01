#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lattice::cli {

/// Runs one command line (without the program name). Exit codes: 0 success
/// or clean/equivalent, 1 violations/distinct/failed operation, 2 malformed
/// input or usage.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lattice::cli
