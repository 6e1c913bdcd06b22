#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace physfuse::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one command line (without the program name). JSON goes to `out`,
/// diagnostics to `err`. Returns the process exit code: 0 ok, 2 validation,
/// 3 I/O, 4 numeric domain.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace physfuse::cli
