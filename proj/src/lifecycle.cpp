#include "lifecycle.hpp"

#include <algorithm>

#include "results.hpp"

namespace wlmbridge {

const char* to_string(JobState s) {
    switch (s) {
        case JobState::Pending: return "pending";
        case JobState::Submitted: return "submitted";
        case JobState::Queued: return "queued";
        case JobState::Running: return "running";
        case JobState::Transferring: return "transferring";
        case JobState::Completed: return "completed";
        case JobState::Failed: return "failed";
        case JobState::Cancelled: return "cancelled";
    }
    return "unknown";
}

bool is_terminal(JobState s) {
    return s == JobState::Completed || s == JobState::Failed || s == JobState::Cancelled;
}

const char* to_string(JobEvent::Kind k) {
    switch (k) {
        case JobEvent::Kind::SubmitOk: return "SubmitOk";
        case JobEvent::Kind::SubmitErr: return "SubmitErr";
        case JobEvent::Kind::BackendQueued: return "BackendQueued";
        case JobEvent::Kind::BackendRunning: return "BackendRunning";
        case JobEvent::Kind::BackendDone: return "BackendDone";
        case JobEvent::Kind::BackendFailed: return "BackendFailed";
        case JobEvent::Kind::TransferStarted: return "TransferStarted";
        case JobEvent::Kind::TransferOk: return "TransferOk";
        case JobEvent::Kind::TransferErr: return "TransferErr";
        case JobEvent::Kind::CancelRequested: return "CancelRequested";
    }
    return "?";
}

std::optional<JobState> apply_event(JobState state, JobEvent::Kind event, bool has_results) {
    using K = JobEvent::Kind;
    switch (state) {
        case JobState::Pending:
            if (event == K::SubmitOk) return JobState::Submitted;
            if (event == K::SubmitErr) return JobState::Failed;
            return std::nullopt;
        case JobState::Submitted:
            if (event == K::BackendQueued) return JobState::Queued;
            if (event == K::BackendFailed) return JobState::Failed;
            return std::nullopt;
        case JobState::Queued:
            if (event == K::BackendRunning) return JobState::Running;
            if (event == K::CancelRequested) return JobState::Cancelled;
            if (event == K::BackendFailed) return JobState::Failed;
            return std::nullopt;
        case JobState::Running:
            if (event == K::BackendDone)
                return has_results ? JobState::Transferring : JobState::Completed;
            if (event == K::TransferStarted && has_results) return JobState::Transferring;
            if (event == K::BackendFailed) return JobState::Failed;
            if (event == K::CancelRequested) return JobState::Cancelled;
            return std::nullopt;
        case JobState::Transferring:
            if (event == K::TransferOk) return JobState::Completed;
            if (event == K::TransferErr) return JobState::Failed;
            return std::nullopt;
        case JobState::Completed:
        case JobState::Failed:
        case JobState::Cancelled:
            return std::nullopt; // terminal states absorb nothing
    }
    return std::nullopt;
}

std::string render_age(std::int64_t seconds) {
    if (seconds < 0) seconds = 0;
    std::int64_t d = seconds / 86400;
    std::int64_t h = (seconds % 86400) / 3600;
    std::int64_t m = (seconds % 3600) / 60;
    std::int64_t s = seconds % 60;
    std::string out;
    if (d > 0) {
        out = std::to_string(d) + "d";
        if (h > 0) out += std::to_string(h) + "h";
    } else if (h > 0) {
        out = std::to_string(h) + "h";
        if (m > 0) out += std::to_string(m) + "m";
    } else if (m > 0) {
        out = std::to_string(m) + "m";
        if (s > 0) out += std::to_string(s) + "s";
    } else {
        out = std::to_string(s) + "s";
    }
    return out;
}

JobStore::JobStore(AdapterContract& adapter, VirtualNodeRegistry& registry, const Clock& clock,
                   std::string home)
    : adapter_(adapter), registry_(registry), clock_(clock), home_(std::move(home)) {}

bool JobStore::apply(JobRecord& record, const JobEvent& event) {
    auto next = apply_event(record.state, event.kind, record.manifest.results.has_value());
    if (!next) return false;
    record.state = *next;
    record.transition_log.push_back({*next, clock_.now_ms()});
    if (event.kind == JobEvent::Kind::SubmitOk) record.backend_job_id = event.backend_id;
    if (event.kind == JobEvent::Kind::BackendDone) record.exit_code = event.exit_code;
    return true;
}

void JobStore::freeze_failed(JobRecord& record, const std::string& reason) {
    record.failure_reason = reason;
    if (record.state != JobState::Failed) {
        record.state = JobState::Failed;
        record.transition_log.push_back({JobState::Failed, clock_.now_ms()});
    }
}

JobRecord JobStore::submit_job(const JobManifest& manifest) {
    JobRecord record;
    record.manifest = manifest;
    record.state = JobState::Pending;
    record.transition_log.push_back({JobState::Pending, clock_.now_ms()});

    std::string script = render_batch_script(manifest);
    std::string submit_error;
    std::optional<std::string> backend_id;
    try {
        record.directives = parse_pbs_directives(script);
        VirtualNode node = registry_.select(record.directives);
        record.queue_name = node.queue.name;
        backend_id = adapter_.submit(script, record.queue_name);
    } catch (const WlmError& e) {
        submit_error = std::string(err_name(e.code())) + ": " + e.what();
    }

    std::lock_guard lock(mu_);
    std::int64_t seq = next_seq_++;
    record.uid = "tj-" + std::to_string(seq);
    if (backend_id) {
        apply(record, JobEvent::submit_ok(*backend_id));
    } else {
        apply(record, JobEvent::of(JobEvent::Kind::SubmitErr));
        record.failure_reason = submit_error;
    }
    records_.emplace(seq, record);
    by_uid_.emplace(record.uid, seq);
    return record;
}

JobRecord JobStore::reconcile_job(const std::string& uid) {
    std::string backend_id;
    bool resume_transfer = false;
    {
        std::lock_guard lock(mu_);
        auto it = by_uid_.find(uid);
        if (it == by_uid_.end()) fail(Err::no_such_job, "no job with uid '" + uid + "'");
        const JobRecord& record = records_.at(it->second);
        if (is_terminal(record.state)) return record; // terminal states are absorbing
        if (record.state == JobState::Transferring) resume_transfer = true;
        else backend_id = record.backend_job_id.value_or("");
    }
    if (resume_transfer) return run_transfer(uid);

    BackendStatus status;
    try {
        status = adapter_.status(backend_id);
    } catch (const WlmError&) {
        std::lock_guard lock(mu_);
        auto& backoff = backoff_[uid];
        backoff.delay_s = backoff.delay_s == 0 ? 1 : std::min<std::int64_t>(backoff.delay_s * 2, 32);
        backoff.next_poll_ms = clock_.now_ms() + backoff.delay_s * 1000;
        return records_.at(by_uid_.at(uid));
    }

    bool transfer_needed = false;
    JobRecord snapshot;
    {
        std::lock_guard lock(mu_);
        backoff_.erase(uid);
        JobRecord& record = records_.at(by_uid_.at(uid));
        if (is_terminal(record.state)) return record;

        using K = JobEvent::Kind;
        std::vector<JobEvent> chain;
        bool anomaly = false;
        switch (status.state) {
            case BackendState::Queued:
            case BackendState::Held:
                if (record.state == JobState::Submitted) chain.push_back(JobEvent::of(K::BackendQueued));
                else if (record.state != JobState::Queued) anomaly = true;
                break;
            case BackendState::Running:
            case BackendState::Exiting:
                if (record.state == JobState::Submitted) chain.push_back(JobEvent::of(K::BackendQueued));
                if (record.state == JobState::Submitted || record.state == JobState::Queued)
                    chain.push_back(JobEvent::of(K::BackendRunning));
                else if (record.state != JobState::Running) anomaly = true;
                break;
            case BackendState::Done:
                if (record.state == JobState::Submitted) chain.push_back(JobEvent::of(K::BackendQueued));
                if (record.state == JobState::Submitted || record.state == JobState::Queued)
                    chain.push_back(JobEvent::of(K::BackendRunning));
                chain.push_back(JobEvent::backend_done(status.exit_code));
                break;
            case BackendState::Unknown:
                // the backend lost the job without reporting completion
                record.failure_reason = "backend no longer knows job " + backend_id;
                chain.push_back(JobEvent::of(K::BackendFailed));
                break;
        }
        if (anomaly) {
            freeze_failed(record, std::string("backend status regressed to ") +
                                      to_string(status.state) + " while job was " +
                                      to_string(record.state));
            return record;
        }
        for (const JobEvent& event : chain) {
            if (!apply(record, event)) {
                freeze_failed(record, std::string("illegal transition: ") + to_string(event.kind) +
                                          " in state " + to_string(record.state));
                return record;
            }
        }
        transfer_needed = record.state == JobState::Transferring;
        snapshot = record;
    }

    if (transfer_needed) return run_transfer(uid);
    return snapshot;
}

// Runs the results copy for a job sitting in Transferring and applies the
// outcome. The store lock is dropped during the copy; cancel_job leaves
// Transferring records alone, so the job cannot move under our feet.
JobRecord JobStore::run_transfer(const std::string& uid) {
    ResultsSpec spec;
    {
        std::lock_guard lock(mu_);
        JobRecord& record = records_.at(by_uid_.at(uid));
        if (record.state != JobState::Transferring) return record;
        spec = *record.manifest.results;
    }

    std::vector<std::string> copied;
    std::string error;
    try {
        copied = collect_results(spec, home_, adapter_);
    } catch (const WlmError& e) {
        error = std::string(err_name(e.code())) + ": " + e.what();
    }

    std::lock_guard lock(mu_);
    JobRecord& record = records_.at(by_uid_.at(uid));
    if (record.state != JobState::Transferring) return record;
    if (error.empty()) {
        record.collected_paths = copied;
        apply(record, JobEvent::of(JobEvent::Kind::TransferOk));
    } else {
        record.failure_reason = error;
        apply(record, JobEvent::of(JobEvent::Kind::TransferErr));
    }
    return record;
}

void JobStore::reconcile_all() {
    std::vector<std::string> uids;
    {
        std::lock_guard lock(mu_);
        std::int64_t now = clock_.now_ms();
        for (const auto& [seq, record] : records_) {
            if (is_terminal(record.state)) continue;
            auto it = backoff_.find(record.uid);
            if (it != backoff_.end() && now < it->second.next_poll_ms) continue;
            uids.push_back(record.uid);
        }
    }
    for (const std::string& uid : uids) reconcile_job(uid);
    sync_registry_counts();
}

JobRecord JobStore::cancel_job(const std::string& uid) {
    std::string backend_id;
    {
        std::lock_guard lock(mu_);
        auto it = by_uid_.find(uid);
        if (it == by_uid_.end()) fail(Err::no_such_job, "no job with uid '" + uid + "'");
        JobRecord& record = records_.at(it->second);
        if (is_terminal(record.state)) return record; // idempotent
        if (record.state == JobState::Transferring) return record; // compute already done
        backend_id = record.backend_job_id.value_or("");
    }

    if (!backend_id.empty()) adapter_.cancel(backend_id); // BackendUnavailable propagates

    std::lock_guard lock(mu_);
    JobRecord& record = records_.at(by_uid_.at(uid));
    if (is_terminal(record.state) || record.state == JobState::Transferring) return record;
    // A job we only saw as Submitted is on the backend queue by now.
    if (record.state == JobState::Submitted) apply(record, JobEvent::of(JobEvent::Kind::BackendQueued));
    apply(record, JobEvent::of(JobEvent::Kind::CancelRequested));
    return record;
}

std::vector<JobRow> JobStore::list_jobs() const {
    std::lock_guard lock(mu_);
    std::vector<JobRow> rows;
    rows.reserve(records_.size());
    for (const auto& [seq, record] : records_) {
        rows.push_back({record.manifest.name, render_age(age_seconds(record)),
                        to_string(record.state)});
    }
    return rows;
}

std::int64_t JobStore::age_seconds(const JobRecord& record) const {
    if (record.transition_log.empty()) return 0;
    return (clock_.now_ms() - record.transition_log.front().at_ms) / 1000;
}

std::optional<JobRecord> JobStore::get(const std::string& uid) const {
    std::lock_guard lock(mu_);
    auto it = by_uid_.find(uid);
    if (it == by_uid_.end()) return std::nullopt;
    return records_.at(it->second);
}

std::optional<JobRecord> JobStore::find_by_name(const std::string& name) const {
    std::lock_guard lock(mu_);
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
        if (it->second.manifest.name == name) return it->second;
    }
    return std::nullopt;
}

std::size_t JobStore::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

void JobStore::sync_registry_counts() {
    std::map<std::string, std::pair<int, int>> counts; // queue -> {pending, running}
    {
        std::lock_guard lock(mu_);
        for (const auto& [seq, record] : records_) {
            if (record.queue_name.empty()) continue;
            auto& [pending, running] = counts[record.queue_name];
            if (record.state == JobState::Submitted || record.state == JobState::Queued) ++pending;
            else if (record.state == JobState::Running || record.state == JobState::Transferring)
                ++running;
        }
    }
    for (const VirtualNode& node : registry_.snapshot()) {
        auto it = counts.find(node.queue.name);
        int pending = it == counts.end() ? 0 : it->second.first;
        int running = it == counts.end() ? 0 : it->second.second;
        registry_.set_counts(node.queue.name, pending, running);
    }
}

} // namespace wlmbridge
