#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "clock.hpp"
#include "manifest.hpp"
#include "registry.hpp"
#include "wlm_adapter.hpp"

namespace wlmbridge {

enum class JobState {
    Pending,
    Submitted,
    Queued,
    Running,
    Transferring,
    Completed,
    Failed,
    Cancelled,
};

const char* to_string(JobState s);
bool is_terminal(JobState s);

struct JobEvent {
    enum class Kind {
        SubmitOk,
        SubmitErr,
        BackendQueued,
        BackendRunning,
        BackendDone,
        BackendFailed,
        TransferStarted,
        TransferOk,
        TransferErr,
        CancelRequested,
    };

    Kind kind;
    std::string backend_id; // SubmitOk
    int exit_code = 0;      // BackendDone

    static JobEvent submit_ok(std::string id) { return {Kind::SubmitOk, std::move(id), 0}; }
    static JobEvent backend_done(int exit) { return {Kind::BackendDone, "", exit}; }
    static JobEvent of(Kind kind) { return {kind, "", 0}; }
};

const char* to_string(JobEvent::Kind k);

// The pure transition relation. Returns the target state for legal
// (state, event) pairs and nullopt for everything else, including
// self-loops and any event aimed at a terminal state. BackendDone from
// Running goes to Transferring only when the job declared a results clause.
std::optional<JobState> apply_event(JobState state, JobEvent::Kind event, bool has_results);

struct Transition {
    JobState state;
    std::int64_t at_ms;

    bool operator==(const Transition&) const = default;
};

struct JobRecord {
    std::string uid;
    JobManifest manifest;
    PbsDirectives directives;
    std::string queue_name;
    std::optional<std::string> backend_job_id;
    JobState state = JobState::Pending;
    std::vector<Transition> transition_log;
    std::optional<int> exit_code;
    std::string failure_reason;               // cause for Failed records
    std::vector<std::string> collected_paths; // transfer destinations
};

struct JobRow {
    std::string name;
    std::string age;
    std::string status;
};

// Compact largest-unit-first form: "2s", "1m30s", "2h3m", "1d4h".
std::string render_age(std::int64_t seconds);

// Owns all job records and the reconciliation logic that advances them by
// polling the backend. Transitions for one job are serialized under the
// store lock; the adapter is never called while it is held.
class JobStore {
public:
    JobStore(AdapterContract& adapter, VirtualNodeRegistry& registry, const Clock& clock,
             std::string home);

    // Places and submits one parsed manifest. Placement and backend
    // failures yield a Failed record rather than an exception.
    JobRecord submit_job(const JobManifest& manifest);

    // Polls the backend and applies whatever progress it reports; runs the
    // results transfer inline when the job enters Transferring. Backend
    // outages leave the record unchanged under exponential backoff.
    JobRecord reconcile_job(const std::string& uid);
    void reconcile_all();

    // Idempotent: terminal records (and records mid-transfer) are returned
    // unchanged. Throws NoSuchJob.
    JobRecord cancel_job(const std::string& uid);

    std::vector<JobRow> list_jobs() const;
    std::optional<JobRecord> get(const std::string& uid) const;
    // Most recently submitted record with this manifest name.
    std::optional<JobRecord> find_by_name(const std::string& name) const;
    std::size_t size() const;

    // Mirrors per-queue pending/running totals into the virtual nodes.
    void sync_registry_counts();

    const std::string& home() const { return home_; }
    const Clock& clock() const { return clock_; }

private:
    struct Backoff {
        std::int64_t delay_s = 0;
        std::int64_t next_poll_ms = 0;
    };

    bool apply(JobRecord& record, const JobEvent& event); // false = illegal
    void freeze_failed(JobRecord& record, const std::string& reason);
    JobRecord run_transfer(const std::string& uid);
    std::int64_t age_seconds(const JobRecord& record) const;

    AdapterContract& adapter_;
    VirtualNodeRegistry& registry_;
    const Clock& clock_;
    std::string home_;

    mutable std::mutex mu_;
    std::int64_t next_seq_ = 1;
    std::map<std::int64_t, JobRecord> records_; // iteration = submission order
    std::map<std::string, std::int64_t> by_uid_;
    std::map<std::string, Backoff> backoff_;
};

} // namespace wlmbridge
