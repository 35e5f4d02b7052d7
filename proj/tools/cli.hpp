#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace knva::cli {

// Exit codes: 0 all checks pass, 1 a check failed, 2 configuration or input error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;

// Runs one command line (args excludes the program name). Normal output goes to out,
// diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace knva::cli
