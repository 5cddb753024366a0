#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drugmcts::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationFailure = 1;
inline constexpr int kIoOrConfigError = 2;
inline constexpr int kBackendFailure = 3;

/// Runs the tool with argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace drugmcts::cli
