#pragma once

namespace ntsopt::cli {

// Parses argv, dispatches to the subcommands (fit, frontier, asratio,
// marginal, budget, backtest), and returns the process exit code:
// 0 success, 2 input error (bad flags, malformed files, infeasible request),
// 3 numerical failure (solver or quadrature breakdown).
int run(int argc, const char* const* argv);

}  // namespace ntsopt::cli
