#pragma once

namespace hcd {

// Entry point of the hcdlab command-line tool. Returns the process exit
// code: 0 on success (reports may still carry violated=true), 2 on usage
// errors, 3 on numerical failures.
int run_cli(int argc, const char* const* argv);

}  // namespace hcd
