#pragma once

#include <string>
#include <vector>

namespace wlmbridge {

struct CommandResult {
    int exit_code = -1; // -1 when the process did not exit normally
    bool spawn_failed = false;
    bool timed_out = false;
    std::string out;
    std::string err;

    bool ok() const { return !spawn_failed && !timed_out && exit_code == 0; }
};

// Runs argv[0] with the given arguments, capturing stdout and stderr. The
// child is killed once timeout_ms elapses.
CommandResult run_command(const std::vector<std::string>& argv, int timeout_ms);

} // namespace wlmbridge
