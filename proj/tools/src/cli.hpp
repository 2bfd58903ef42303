#pragma once

#include <ostream>

namespace trigcm::cli {

enum ExitCode : int { kOk = 0, kPartialFailure = 1, kInputError = 2, kVersionError = 3 };

// Parses `trigcm <command> [flags]`, resolves the run config (defaults,
// then --config file, then --set pairs, then dedicated flags) and runs the
// command. Errors are reported on `err` and mapped onto ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace trigcm::cli
