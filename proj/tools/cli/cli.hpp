#pragma once

#include <string>
#include <vector>

namespace decompad::cli {

enum ExitCode : int { kSuccess = 0, kValidation = 1, kIoFailure = 2, kNumericFailure = 3 };

/// Log verbosity comes from this variable (spdlog level names, e.g. "debug").
inline constexpr const char* kLogLevelEnv = "DECOMPAD_LOG_LEVEL";

/// Entry point behind the `decompad` executable; `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args);

}  // namespace decompad::cli
