#pragma once

namespace fquant {

// Command-line entry point; returns the process exit code (0 success,
// 1 numeric failure, 2 usage error).
int cli_run(int argc, const char* const* argv);

}  // namespace fquant
