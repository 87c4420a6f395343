#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace devoc::cli {

/// Exit codes: 0 success, 1 I/O or format error, 2 empty/degenerate input,
/// 3 insufficient data.
enum ExitCode : int { kOk = 0, kIoError = 1, kEmptyInput = 2, kInsufficientData = 3 };

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace devoc::cli
