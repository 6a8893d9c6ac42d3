#pragma once

namespace xeval::cli {

// Parses arguments, runs one subcommand, and returns the process exit code:
// 0 success, 1 usage or configuration error, 2 invalid input data.
int run(int argc, const char* const* argv);

}  // namespace xeval::cli
