#pragma once

#include <iosfwd>

namespace tempograph::cli {

/// Runs the command line tool. Human-readable summaries go to `out`, errors
/// (one JSON object per line) and log messages to `err`. Returns the process
/// exit code: 0 on success, 1 for runtime failures, 2 for usage errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tempograph::cli
