#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geosteer::cli {

/// Runs one CLI invocation. args excludes the program name. Returns the exit
/// status; messages go to `out` and errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geosteer::cli
