#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace clipmot {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 usage error, 2 data error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clipmot
