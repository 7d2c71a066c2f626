#pragma once

#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "registry.hpp"

namespace wlmbridge {

enum class BackendState { Queued, Running, Exiting, Done, Held, Unknown };

const char* to_string(BackendState s);

struct BackendStatus {
    BackendState state = BackendState::Unknown;
    int exit_code = 0; // meaningful only when state == Done

    static BackendStatus queued() { return {BackendState::Queued, 0}; }
    static BackendStatus running() { return {BackendState::Running, 0}; }
    static BackendStatus exiting() { return {BackendState::Exiting, 0}; }
    static BackendStatus done(int code) { return {BackendState::Done, code}; }
    static BackendStatus held() { return {BackendState::Held, 0}; }
    static BackendStatus unknown() { return {BackendState::Unknown, 0}; }

    bool operator==(const BackendStatus&) const = default;
};

// Minimal backend contract the bridge schedules against. submit is
// at-most-once per call; status must be side-effect free.
class AdapterContract {
public:
    virtual ~AdapterContract() = default;

    virtual std::string submit(const std::string& script, const std::string& queue) = 0;
    virtual BackendStatus status(const std::string& backend_id) = 0;
    virtual void cancel(const std::string& backend_id) = 0;
    virtual std::string read_file(const std::string& path) = 0;
    virtual std::vector<QueueSpec> queues() = 0;
};

struct ExecAdapterConfig {
    std::string qsub = "qsub";
    std::string qstat = "qstat";
    std::string qdel = "qdel";
    int timeout_ms = 30000;
    std::string temp_dir; // empty -> std::filesystem::temp_directory_path()
};

// Drives a real Torque/PBS installation through its command-line binaries:
// `qsub -q <queue> <scriptfile>`, `qstat -f <id>`, `qdel <id>`.
class PbsExecAdapter final : public AdapterContract {
public:
    explicit PbsExecAdapter(ExecAdapterConfig config = config_from_env());

    // Binary paths from WLMBRIDGE_QSUB / WLMBRIDGE_QSTAT / WLMBRIDGE_QDEL.
    static ExecAdapterConfig config_from_env();

    std::string submit(const std::string& script, const std::string& queue) override;
    BackendStatus status(const std::string& backend_id) override;
    void cancel(const std::string& backend_id) override;
    std::string read_file(const std::string& path) override;
    std::vector<QueueSpec> queues() override;

    // qstat -f transcript -> status. Malformed input maps to Unknown.
    static BackendStatus parse_qstat_job(const std::string& text);
    // qstat -Q -f transcript -> execution queues with their limits.
    static std::vector<QueueSpec> parse_qstat_queues(const std::string& text);

private:
    ExecAdapterConfig config_;
    std::mutex mu_; // guards last_exit_
    std::unordered_map<std::string, int> last_exit_; // exit codes seen at state C
};

} // namespace wlmbridge
