#pragma once

#include <ostream>
#include <span>
#include <string>

namespace dartwin::cli {

enum ExitCode : int {
  ok = 0,
  diagnostics_failed = 1,
  usage_error = 2,
  internal_error = 3,
};

/// Runs one command. `args` excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace dartwin::cli
