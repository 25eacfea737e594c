#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace epls::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one command line (args excludes the program name). Returns 0 on
/// success, 1 on usage errors, 2 on data errors and 3 on numerical failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "lo:hi:step" or a comma list.
[[nodiscard]] std::vector<double> parse_grid(const std::string& text);

}  // namespace epls::cli
