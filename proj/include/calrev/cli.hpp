#pragma once

#include <iosfwd>

namespace calrev {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Entry point of the `calrev` tool. Subcommands: ingest, simulate, serve,
// export-run, eval, tune. Results go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace calrev
