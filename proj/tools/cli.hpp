#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pbergman::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kInputError = 2, kIoError = 3 };

/// Runs the tool with the given arguments (argv[0] is the program name).
/// Normal output goes to out, diagnostics to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload for tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a hash used in output headers.
std::uint64_t fnv1a(const std::string& text);

}  // namespace pbergman::cli
