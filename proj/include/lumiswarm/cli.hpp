#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lumiswarm {

// Exit codes of `run` and `replay`.
inline constexpr int kExitSolved = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitViolation = 2;
inline constexpr int kExitCap = 3;
inline constexpr int kExitReplayMismatch = 5;

// Entry point of the lumiswarm tool; args excludes the program name.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lumiswarm
