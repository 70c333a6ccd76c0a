#pragma once

#include <string>
#include <vector>

namespace chipdress::cli {

/// Exit status of a run: 0 success, 1 I/O or unexpected failure, 2 usage
/// error (unknown subcommand, bad flag), 3 configuration error, 4 numerical
/// failure.
enum ExitCode : int { ok = 0, failure = 1, usage = 2, config_error = 3, numerical_error = 4 };

int dispatch(int argc, const char* const* argv);
int dispatch(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace chipdress::cli
