#ifndef SVOC_CLI_HPP_
#define SVOC_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace svoc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitIo = 3;

/// Runs one subcommand (args exclude the program name) and returns the exit code:
/// 0 success, 1 usage or problem-definition error, 2 numerical failure, 3 I/O error.
/// The environment variable SVOC_OUT_DIR, when set, replaces --out.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace svoc

#endif  // SVOC_CLI_HPP_
