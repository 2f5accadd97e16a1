#ifndef PROCURE_CLI_HPP
#define PROCURE_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace procure {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line tool in-process. args excludes the program name.
/// Machine-readable summaries go to out, progress and errors to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace procure

#endif  // PROCURE_CLI_HPP
