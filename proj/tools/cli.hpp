#pragma once

#include <ostream>

namespace pregma::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,       // success, or the formula holds
  kFailed = 1,   // validation failure, unreadable input, or the formula fails
  kUnknown = 2,  // the enclosure does not separate the threshold
  kUsage = 3,
};

/// Runs one invocation. Results go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pregma::cli
