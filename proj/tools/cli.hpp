#pragma once

namespace windregime::cli {

enum ExitCode : int { ok = 0, failure = 1, config_error = 2, dependency_error = 3, validation_error = 4 };

/// Parses argv and runs one subcommand; returns the process exit code.
int run_cli(int argc, const char* const* argv);

} // namespace windregime::cli
