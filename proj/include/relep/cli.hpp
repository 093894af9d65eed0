// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace relep
{

inline constexpr int ExitOk = 0;
inline constexpr int ExitDataFailure = 1;
inline constexpr int ExitConfigError = 2;

/// Entry point of the `relep` tool. Never throws; failures map to exit codes.
int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace relep
