#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace taxoforge {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFindings = 1;  // only with --strict
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in = std::cin);

}  // namespace taxoforge
