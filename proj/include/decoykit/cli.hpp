#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace decoykit::cli {

/// Runs the command line given argv-style arguments (without the program
/// name). Returns the process exit code: 0 on success (rate: positive key),
/// 2 when no secret key is certifiable, 1 on any error.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace decoykit::cli
