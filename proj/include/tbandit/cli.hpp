// cli.hpp
#pragma once
#include <iosfwd>

namespace tbandit {

/// Entry point of the `tbandit` command line (subcommands sweep,
/// complexity, lowerbound). Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace tbandit
