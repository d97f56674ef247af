#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ieval::cli {

inline constexpr const char* kToolName = "instrument-eval";
inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Runs one command line (args excludes the program name). Reports go to
// `out`; usage errors and machine-readable error JSON go to `err`.
// Returns 0 on success, 1 on evaluation error, 2 on usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ieval::cli
