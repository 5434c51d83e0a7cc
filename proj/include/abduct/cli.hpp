#ifndef ABDUCT_CLI_HPP
#define ABDUCT_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace abduct::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kIoError = 1, kDataError = 2, kStatsError = 3 };

/// Entry point behind the abduct_rank binary. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace abduct::cli

#endif  // ABDUCT_CLI_HPP
