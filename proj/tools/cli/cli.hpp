#pragma once

#include <iosfwd>

namespace otsym::cli {

/// Runs the otsym command line. Returns the process exit code: 0 on success,
/// 1 on any error, 2 when a test rejects and --fail-on-reject is set.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace otsym::cli
