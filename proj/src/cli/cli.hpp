#pragma once

#include <ostream>

namespace schlab::cli {

/// Exit codes: 0 ok, 1 IO failure, 2 usage error, 3 statistical check
/// failed, 4 computation failed.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitStatistical = 3;
inline constexpr int kExitCompute = 4;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace schlab::cli
