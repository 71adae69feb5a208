#pragma once

#include <string>
#include <vector>

// Command-line surface of the toolkit. run() parses and executes one
// invocation and returns the process exit code:
//   0  success
//   1  numerical failure (a fit or solver did not converge)
//   2  usage or input error (bad flags, malformed files, unknown keys)
// Exposed as a library so tests can exercise the exact CLI paths in-process.

namespace cavem::cli {

int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

} // namespace cavem::cli
