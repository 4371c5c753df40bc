#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wass::cli {

/// Runs one command line (without the program name). Exit codes: 0 success,
/// 1 runtime error, 2 usage error. Machine-readable output goes to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wass::cli
