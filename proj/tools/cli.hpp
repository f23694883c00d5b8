#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace incdsi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs the `incdsi` command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace incdsi::cli
