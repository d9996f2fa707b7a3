#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace derivelog::cli {

/// Exit codes.
inline constexpr int kAnswered = 0;
inline constexpr int kUnexpected = 1;
inline constexpr int kInputError = 2;
inline constexpr int kBudgetExceeded = 3;

/// Runs one command line (without the program name). JSON results go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace derivelog::cli
