#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pulseforge::cli {

/// Runs one `pulseforge` subcommand. `args` excludes the program name.
/// Returns 0 on success; on failure writes `{"error": kind, "message": ...}`
/// to `err` and returns nonzero.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pulseforge::cli
