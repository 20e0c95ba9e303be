#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace segmamba::cli {

enum ExitCode : int { kSuccess = 0, kFailure = 1, kIoOrUsage = 2 };

/// Parses argv and dispatches to infer / bench / check / eval / init-weights /
/// describe. Output goes to out, diagnostics to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload for tests: args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace segmamba::cli
