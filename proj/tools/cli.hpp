#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clptac::cli {

/// Runs the command line `args` (without the program name). Returns the process exit status:
/// 0 on success, 1 when the computation failed, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clptac::cli
