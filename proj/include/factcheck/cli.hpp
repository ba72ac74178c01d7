#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace factcheck {

// Command-line driver. `args` are the program arguments without argv[0].
// Returns the process exit status: 0 success, 1 pipeline error, 2 usage
// error. All success output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace factcheck
