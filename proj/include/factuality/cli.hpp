#pragma once

#include <ostream>

namespace factuality::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitWarnings = 1;
inline constexpr int kExitFailure = 2;

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "FACTUALITY_CONFIG";

/// Entry point of the `factuality` executable; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace factuality::cli
