#pragma once

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "manifest.hpp"

namespace wlmbridge {

class AdapterContract;

// One backend queue and its admission limits.
struct QueueSpec {
    std::string name;
    std::optional<std::int64_t> max_walltime_seconds;
    int max_nodes = 1;
    std::vector<std::string> node_names;

    bool operator==(const QueueSpec&) const = default;
};

// Bridge-side stand-in for one queue. Jobs are placed onto virtual nodes
// and forwarded to the queue they mirror.
struct VirtualNode {
    QueueSpec queue;
    int jobs_pending = 0;
    int jobs_running = 0;
    std::int64_t last_refresh_ms = 0;
};

enum class ViolationKind { WalltimeExceeded, NodesExceeded };

struct Violation {
    ViolationKind kind;
    std::string detail;
};

// Checks the script's resource requests against one queue's limits. Absent
// directive fields always pass.
std::vector<Violation> validate_against_queue(const PbsDirectives& d, const QueueSpec& q);

// Queries the backend for its queues and limits. Throws BackendUnavailable.
std::vector<QueueSpec> discover_queues(AdapterContract& adapter);

// Queue <-> virtual-node bijection, kept in configuration order. Readers
// take a shared lock; refresh swaps the whole view atomically.
class VirtualNodeRegistry {
public:
    VirtualNodeRegistry() = default;

    // build_virtual_nodes: throws DuplicateQueue on repeated names.
    explicit VirtualNodeRegistry(const std::vector<QueueSpec>& queues,
                                 std::int64_t now_ms = 0);

    // Re-discovery: limits update in place, job counts of surviving queues
    // are preserved, vanished queues drop out.
    void refresh(const std::vector<QueueSpec>& queues, std::int64_t now_ms);

    // Placement: the named queue when `-q` was given (NoSuchQueue if absent,
    // NoFeasibleQueue if it rejects), otherwise the first queue in
    // configuration order that admits the directives (NoFeasibleQueue when
    // none does).
    VirtualNode select(const PbsDirectives& d) const;

    std::optional<VirtualNode> find(const std::string& queue_name) const;
    std::vector<VirtualNode> snapshot() const;
    void set_counts(const std::string& queue_name, int pending, int running);
    std::size_t size() const;
    bool empty() const { return size() == 0; }

private:
    static void check_unique(const std::vector<QueueSpec>& queues);

    mutable std::shared_mutex mu_;
    std::vector<VirtualNode> nodes_;
};

} // namespace wlmbridge
