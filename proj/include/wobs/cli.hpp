#pragma once

#include <string>
#include <vector>

namespace wobs {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerification = 2;

/// Entry point of the command-line tool; args excludes the program name.
/// Returns 0 on success, 2 when a hypothesis fails on the grid, 1 for usage,
/// configuration or runtime errors.
int run_cli(const std::vector<std::string>& args);

}  // namespace wobs
