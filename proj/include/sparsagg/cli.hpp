#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sparsagg::cli {

inline constexpr const char* version_string = "sparsagg 0.1.0";

enum ExitCode : int { ok = 0, usage = 1, non_convergence = 2, io_error = 3, numeric_error = 4 };

/// Runs the command line with `args` excluding the program name. Machine
/// output goes to `out` or to files, diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sparsagg::cli
