#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vanish {

/// Entry point of the `vanish` tool. `args` excludes the program name. Returns the exit code:
/// 0 on success, 1 on a failed check or runtime error, CLI11's code on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace vanish
