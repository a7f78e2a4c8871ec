#pragma once

#include <iosfwd>

namespace cpsi {

inline constexpr const char* kVersion = "0.1.0";

// Subcommands detect | infer | estimate-cov | simulate. Returns the process
// exit code: 0 ok, 2 input error, 3 numeric failure, 4 infeasible
// configuration.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cpsi
