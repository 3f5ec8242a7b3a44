#pragma once

namespace vqfont::cli {

// Parses argv and runs the requested subcommand. Returns 0 on success,
// 2 for usage errors (unknown subcommand or flag), 1 for runtime failures
// (reported as a single-line diagnostic on stderr).
int dispatch(int argc, const char* const* argv);

}  // namespace vqfont::cli
