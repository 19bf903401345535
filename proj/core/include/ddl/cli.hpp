// The ddlab command line: solve, sweep, diagnose, compare, classify.
#ifndef DDL_CLI_HPP_
#define DDL_CLI_HPP_

#include <iosfwd>

namespace ddl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Parses argv and runs one subcommand. Output goes to `out`, errors to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace ddl

#endif  // DDL_CLI_HPP_
