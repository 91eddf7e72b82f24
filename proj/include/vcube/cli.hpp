#pragma once

#include <string>
#include <vector>

namespace vcube {

// Entry point behind the `vcube` binary, callable in-process by tests.
// Subcommands: validate, capture, render, simulate, metrics, bench.
// Exit codes: 0 ok, 2 config error, 3 validation failure, 4 runtime error.
// Failures print one machine-readable JSON object to stderr.
int cli_main(int argc, const char* const* argv);

// Convenience overload for tests: cli_main({"validate", ...}).
int cli_main(const std::vector<std::string>& args);

}  // namespace vcube
