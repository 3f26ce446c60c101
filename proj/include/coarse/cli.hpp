#ifndef COARSE_CLI_HPP
#define COARSE_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace coarse::cli {

/// Dispatches one CLI invocation. Exit codes: 0 property holds / compatible /
/// success, 1 property fails / incompatible, 2 undecided (a resource cap was
/// hit), 3 input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coarse::cli

#endif
