#include "registry.hpp"

#include <set>

#include "wlm_adapter.hpp"

namespace wlmbridge {

std::vector<Violation> validate_against_queue(const PbsDirectives& d, const QueueSpec& q) {
    std::vector<Violation> violations;
    if (d.walltime_seconds && q.max_walltime_seconds &&
        *d.walltime_seconds > *q.max_walltime_seconds) {
        violations.push_back({ViolationKind::WalltimeExceeded,
                              "walltime " + format_walltime(*d.walltime_seconds) + " exceeds queue '" +
                                  q.name + "' limit " + format_walltime(*q.max_walltime_seconds)});
    }
    if (d.node_count && *d.node_count > q.max_nodes) {
        violations.push_back({ViolationKind::NodesExceeded,
                              "job requests " + std::to_string(*d.node_count) + " nodes, queue '" +
                                  q.name + "' allows " + std::to_string(q.max_nodes)});
    }
    return violations;
}

std::vector<QueueSpec> discover_queues(AdapterContract& adapter) {
    return adapter.queues();
}

void VirtualNodeRegistry::check_unique(const std::vector<QueueSpec>& queues) {
    std::set<std::string> seen;
    for (const QueueSpec& q : queues) {
        if (!seen.insert(q.name).second)
            fail(Err::duplicate_queue, "duplicate queue name '" + q.name + "'");
    }
}

VirtualNodeRegistry::VirtualNodeRegistry(const std::vector<QueueSpec>& queues,
                                         std::int64_t now_ms) {
    check_unique(queues);
    for (const QueueSpec& q : queues) nodes_.push_back({q, 0, 0, now_ms});
}

void VirtualNodeRegistry::refresh(const std::vector<QueueSpec>& queues, std::int64_t now_ms) {
    check_unique(queues);
    std::unique_lock lock(mu_);
    std::vector<VirtualNode> next;
    next.reserve(queues.size());
    for (const QueueSpec& q : queues) {
        VirtualNode node{q, 0, 0, now_ms};
        for (const VirtualNode& old : nodes_) {
            if (old.queue.name == q.name) {
                node.jobs_pending = old.jobs_pending;
                node.jobs_running = old.jobs_running;
                break;
            }
        }
        next.push_back(std::move(node));
    }
    nodes_ = std::move(next);
}

VirtualNode VirtualNodeRegistry::select(const PbsDirectives& d) const {
    std::shared_lock lock(mu_);
    if (d.queue_name) {
        for (const VirtualNode& node : nodes_) {
            if (node.queue.name != *d.queue_name) continue;
            auto violations = validate_against_queue(d, node.queue);
            if (violations.empty()) return node;
            fail(Err::no_feasible_queue,
                 "queue '" + node.queue.name + "' rejects the job: " + violations.front().detail);
        }
        fail(Err::no_such_queue, "no queue named '" + *d.queue_name + "'");
    }
    for (const VirtualNode& node : nodes_) {
        if (validate_against_queue(d, node.queue).empty()) return node;
    }
    fail(Err::no_feasible_queue,
         nodes_.empty() ? "registry has no queues"
                        : "no queue admits the requested walltime/node count");
}

std::optional<VirtualNode> VirtualNodeRegistry::find(const std::string& queue_name) const {
    std::shared_lock lock(mu_);
    for (const VirtualNode& node : nodes_) {
        if (node.queue.name == queue_name) return node;
    }
    return std::nullopt;
}

std::vector<VirtualNode> VirtualNodeRegistry::snapshot() const {
    std::shared_lock lock(mu_);
    return nodes_;
}

void VirtualNodeRegistry::set_counts(const std::string& queue_name, int pending, int running) {
    std::unique_lock lock(mu_);
    for (VirtualNode& node : nodes_) {
        if (node.queue.name == queue_name) {
            node.jobs_pending = pending;
            node.jobs_running = running;
            return;
        }
    }
}

std::size_t VirtualNodeRegistry::size() const {
    std::shared_lock lock(mu_);
    return nodes_.size();
}

} // namespace wlmbridge
