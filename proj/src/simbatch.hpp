#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "wlm_adapter.hpp"

namespace wlmbridge {

// One synthetic workload. Runtime and exit code come from `#SIM runtime=N`
// and `#SIM exit=N` script lines, which real PBS treats as comments.
struct SimJob {
    std::string sim_id;
    std::string queue;
    int nodes_requested = 1;
    std::optional<std::int64_t> walltime_limit_seconds;
    std::int64_t declared_runtime = 0;
    int declared_exit = 0;
    std::optional<std::string> stdout_path;
    std::optional<std::string> stderr_path;
    BackendStatus state = BackendStatus::queued();
    std::optional<std::int64_t> started_at; // clock when the job began running
    std::vector<std::string> nodes_held;
};

struct SimEvent {
    enum class Kind { Started, Completed, WalltimeKilled, Cancelled };

    std::int64_t tick = 0;
    Kind kind = Kind::Started;
    std::string sim_id;
    int exit_code = 0; // Completed / WalltimeKilled only

    bool operator==(const SimEvent&) const = default;
};

std::string to_string(const SimEvent& e);

struct SimClusterConfig {
    std::vector<QueueSpec> queues; // max_nodes always equals the node count
    std::string home;              // expansion target for $HOME in output paths
};

// Config file format: `queues: [{name, max_walltime, nodes: [names]}]` with
// an optional top-level `home`.
SimClusterConfig parse_cluster_config(const std::string& yaml_text);
SimClusterConfig load_cluster_config(const std::string& path);

// Discrete-time Torque stand-in: strict per-queue FIFO, no backfill, one
// running job per busy node. One tick is one simulated second. Calls are
// internally serialized, so the bridge can share it across threads.
class SimCluster final : public AdapterContract {
public:
    explicit SimCluster(SimClusterConfig config);

    std::string submit(const std::string& script, const std::string& queue) override;
    BackendStatus status(const std::string& sim_id) override;
    void cancel(const std::string& sim_id) override;
    std::string read_file(const std::string& path) override;
    std::vector<QueueSpec> queues() override;

    // Advances the clock n ticks. Per tick: queued jobs start while their
    // queue has enough free nodes, then jobs that have run for their full
    // declared runtime complete (writing their output file), then jobs over
    // their walltime are killed with exit 271.
    std::vector<SimEvent> tick(int n);

    std::int64_t clock() const;

    // Text completed jobs write to their `-o` path instead of the default
    // "<sim_id> exit <code>" line.
    void set_output_fixture(std::string text);

    std::vector<SimEvent> event_log() const;
    std::optional<SimJob> job(const std::string& sim_id) const;
    std::vector<std::string> pending_ids(const std::string& queue) const;
    std::vector<std::string> busy_nodes() const;
    const std::string& home() const { return config_.home; }

private:
    void tick_once(std::vector<SimEvent>& events);
    void start_eligible(std::vector<SimEvent>& events);
    void finish_job(SimJob& job, bool killed, std::vector<SimEvent>& events);
    void release_nodes(SimJob& job);
    int free_node_count(const QueueSpec& q) const;
    SimJob* find_job(const std::string& sim_id);

    SimClusterConfig config_;
    mutable std::mutex mu_;
    std::int64_t clock_ = 0;
    std::int64_t next_seq_ = 1;
    std::map<std::int64_t, SimJob> jobs_; // keyed by numeric id, iteration = submission order
    std::map<std::string, std::string> node_owner_; // node name -> sim_id, "" when free
    std::map<std::string, std::deque<std::int64_t>> pending_; // queue -> FIFO of job keys
    std::vector<SimEvent> log_;
    std::optional<std::string> output_fixture_;
};

} // namespace wlmbridge
