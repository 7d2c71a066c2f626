#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"

namespace wlmbridge {

enum class CreateMode {
    DirectoryOrCreate, // destination directory is created if absent
    Directory,         // destination directory must already exist
};

const char* to_string(CreateMode m);
CreateMode create_mode_from_string(const std::string& s);

// Where the job's declared output goes after completion (the manifest's
// `results:` clause).
struct ResultsSpec {
    std::string from_path;  // file the job writes, may contain $HOME
    std::string mount_name; // informational mount label
    std::string host_path;  // destination directory, may contain $HOME
    CreateMode create_mode = CreateMode::DirectoryOrCreate;

    bool operator==(const ResultsSpec&) const = default;
};

// The user-facing declarative job object: metadata plus an embedded PBS
// batch script and an optional results clause.
struct JobManifest {
    std::string api_version; // stored, not interpreted
    std::string kind;        // always "TorqueJob" after a successful parse
    std::string name;
    std::string batch_script; // verbatim, exactly one trailing newline
    std::optional<ResultsSpec> results;

    bool operator==(const JobManifest&) const = default;
};

// Structured view of the `#PBS` prologue of a batch script. Lines that are
// valid directives but not covered by the structured fields are kept
// verbatim in raw_directives, in order.
struct PbsDirectives {
    std::optional<std::int64_t> walltime_seconds;
    std::optional<int> node_count;
    std::optional<std::string> stderr_path;
    std::optional<std::string> stdout_path;
    std::optional<std::string> queue_name;
    std::vector<std::string> raw_directives;

    bool operator==(const PbsDirectives&) const = default;
};

// Parses the YAML manifest format (key paths: kind, metadata.name,
// spec.batch, results.from, results.mount.name, results.mount.hostPath.path,
// results.mount.hostPath.type). Throws WlmError with MalformedManifest,
// UnsupportedKind or MissingField.
JobManifest parse_manifest(const std::string& text);

// Canonical YAML rendering; parse_manifest(serialize_manifest(m)) == m.
std::string serialize_manifest(const JobManifest& m);

// "HH:MM:SS" -> seconds. MM and SS must be two digits in 0-59.
std::int64_t parse_walltime(const std::string& text);

// Inverse of parse_walltime; hours are zero-padded to at least two digits.
std::string format_walltime(std::int64_t seconds);

// Scans the directive prologue (everything before the first line that is
// not blank, a shebang or a comment). Later duplicates of a structured
// directive override earlier ones.
PbsDirectives parse_pbs_directives(const std::string& batch_script);

// The script exactly as it will be handed to the backend.
std::string render_batch_script(const JobManifest& m);

// Replaces $HOME / ${HOME} with home (which must be an absolute path).
// Any other variable reference is an UnknownVariable error.
std::string expand_variables(const std::string& path, const std::string& home);

} // namespace wlmbridge
