// Command-line harness: subcommands pressure, dimension, target-cover, moran, box-dim, validate.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rstp/error.hpp"

namespace rstp::cli {

inline constexpr const char* kOutputEnv = "RSTP_OUTPUT_DIR";

// 0 success, 1 other failures (including failed validation checks), 2 configuration errors,
// 3 numeric guards and infeasible schedules.
int exit_code_for(ErrorKind kind);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

} // namespace rstp::cli
