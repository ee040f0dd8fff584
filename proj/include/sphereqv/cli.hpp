#pragma once

#include <atomic>
#include <iosfwd>
#include <string>
#include <vector>

namespace sphereqv {

/// Exit codes: 0 success, 1 numeric or I/O failure, 2 invalid flags or
/// config, 3 oracle-agreement failure under --strict, 130 interrupted.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Set from a signal handler to stop a running experiment; finished cells are still written.
std::atomic<bool>& cli_interrupt_flag();

}  // namespace sphereqv
