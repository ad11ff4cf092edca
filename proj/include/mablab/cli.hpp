#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mablab {

// Subcommands: run, table1, bounds, tilting, simcheck. `args` excludes the
// program name. Returns 0 on success, 1 on bad flags or invalid input, 2 on
// I/O failure.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mablab
