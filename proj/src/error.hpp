#pragma once

#include <stdexcept>
#include <string>

namespace wlmbridge {

// Error codes shared with the public C API (values must stay in sync with
// the WLMB_ERR_* constants in include/wlmbridge.h).
enum class Err : int {
    ok = 0,
    invalid_arg = 1,
    malformed_manifest = 2,
    unsupported_kind = 3,
    missing_field = 4,
    malformed_walltime = 5,
    malformed_directive = 6,
    unknown_variable = 7,
    duplicate_queue = 8,
    no_such_queue = 9,
    no_feasible_queue = 10,
    backend_unavailable = 11,
    no_such_job = 12,
    illegal_transition = 13,
    job_exceeds_queue = 14,
    malformed_config = 15,
    malformed_frame = 16,
    oversized_frame = 17,
    source_missing = 18,
    destination_unwritable = 19,
    results_unavailable = 20,
    transport = 21,
    address_in_use = 22,
    io = 23,
    internal = 24,
};

const char* err_name(Err e);

class WlmError : public std::runtime_error {
public:
    WlmError(Err code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Err code() const noexcept { return code_; }

private:
    Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& message) {
    throw WlmError(code, message);
}

} // namespace wlmbridge
