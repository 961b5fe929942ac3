#pragma once

#include <iosfwd>

namespace tsdr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCompute = 1;
inline constexpr int kExitUsage = 2;

// Environment variable naming the default directory for simulate reports.
inline constexpr const char* kOutputDirEnv = "TSDR_OUTPUT_DIR";

// Entry point of the `tsdr` tool: subcommands fit, simulate, km, generate.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tsdr
