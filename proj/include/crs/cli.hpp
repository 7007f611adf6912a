#pragma once

#include "crs/error.hpp"

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace crs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitEngine = 3;

/// 2 for problems with the user's data, 3 for problems with engine artifacts,
/// remote services or configuration.
int exit_code_for(ErrorCode code);

/// Runs one invocation; args[0] is the program name. Never throws.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace crs::cli
