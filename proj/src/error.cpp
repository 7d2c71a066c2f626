#include "error.hpp"

namespace wlmbridge {

const char* err_name(Err e) {
    switch (e) {
        case Err::ok: return "Ok";
        case Err::invalid_arg: return "InvalidArgument";
        case Err::malformed_manifest: return "MalformedManifest";
        case Err::unsupported_kind: return "UnsupportedKind";
        case Err::missing_field: return "MissingField";
        case Err::malformed_walltime: return "MalformedWalltime";
        case Err::malformed_directive: return "MalformedDirective";
        case Err::unknown_variable: return "UnknownVariable";
        case Err::duplicate_queue: return "DuplicateQueue";
        case Err::no_such_queue: return "NoSuchQueue";
        case Err::no_feasible_queue: return "NoFeasibleQueue";
        case Err::backend_unavailable: return "BackendUnavailable";
        case Err::no_such_job: return "NoSuchJob";
        case Err::illegal_transition: return "IllegalTransition";
        case Err::job_exceeds_queue: return "JobExceedsQueue";
        case Err::malformed_config: return "MalformedConfig";
        case Err::malformed_frame: return "MalformedFrame";
        case Err::oversized_frame: return "OversizedFrame";
        case Err::source_missing: return "SourceMissing";
        case Err::destination_unwritable: return "DestinationUnwritable";
        case Err::results_unavailable: return "ResultsUnavailable";
        case Err::transport: return "TransportError";
        case Err::address_in_use: return "AddressInUse";
        case Err::io: return "IoError";
        case Err::internal: return "InternalError";
    }
    return "UnknownError";
}

} // namespace wlmbridge
