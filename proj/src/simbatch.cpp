#include "simbatch.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "manifest.hpp"
#include "strutil.hpp"

namespace fs = std::filesystem;

namespace wlmbridge {

namespace {

constexpr int kWalltimeKillExit = 271; // Torque's 256 + SIGTERM

struct SimDirectives {
    std::int64_t runtime = 0;
    int exit_code = 0;
};

// `#SIM key=value` prologue lines; same scan rule as #PBS directives.
SimDirectives parse_sim_directives(const std::string& script) {
    SimDirectives d;
    for (const std::string& line : split_lines(script)) {
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.rfind("#!", 0) == 0) continue;
        if (t[0] != '#') break;
        if (t.rfind("#SIM", 0) != 0 || (t.size() > 4 && t[4] != ' ' && t[4] != '\t')) continue;
        std::istringstream rest(t.substr(4));
        std::string tok;
        while (rest >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            std::string key = tok.substr(0, eq);
            std::string value = tok.substr(eq + 1);
            if (key == "runtime" && is_digits(value)) d.runtime = std::stoll(value);
            else if (key == "exit") {
                try {
                    d.exit_code = std::stoi(value);
                } catch (...) {
                }
            }
        }
    }
    return d;
}

} // namespace

std::string to_string(const SimEvent& e) {
    const char* kind = "started";
    switch (e.kind) {
        case SimEvent::Kind::Started: kind = "started"; break;
        case SimEvent::Kind::Completed: kind = "completed"; break;
        case SimEvent::Kind::WalltimeKilled: kind = "walltime-killed"; break;
        case SimEvent::Kind::Cancelled: kind = "cancelled"; break;
    }
    std::ostringstream out;
    out << "t=" << e.tick << ' ' << kind << ' ' << e.sim_id;
    if (e.kind == SimEvent::Kind::Completed || e.kind == SimEvent::Kind::WalltimeKilled)
        out << " exit=" << e.exit_code;
    return out.str();
}

SimClusterConfig parse_cluster_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        fail(Err::malformed_config, std::string("cluster config is not valid YAML: ") + e.what());
    }
    if (!root.IsMap()) fail(Err::malformed_config, "cluster config root must be a map");

    SimClusterConfig cfg;
    try {
        if (root["home"]) cfg.home = root["home"].as<std::string>();
        const YAML::Node queues = root["queues"];
        if (queues && !queues.IsSequence())
            fail(Err::malformed_config, "queues must be a sequence");
        for (const YAML::Node& qn : queues) {
            QueueSpec q;
            if (!qn["name"]) fail(Err::malformed_config, "queue entry without a name");
            q.name = qn["name"].as<std::string>();
            if (q.name.empty()) fail(Err::malformed_config, "queue name is empty");
            if (qn["max_walltime"]) q.max_walltime_seconds = qn["max_walltime"].as<std::int64_t>();
            if (qn["nodes"]) {
                for (const YAML::Node& n : qn["nodes"]) q.node_names.push_back(n.as<std::string>());
            }
            q.max_nodes = static_cast<int>(q.node_names.size());
            for (const QueueSpec& other : cfg.queues) {
                if (other.name == q.name)
                    fail(Err::malformed_config, "duplicate queue '" + q.name + "' in cluster config");
            }
            cfg.queues.push_back(std::move(q));
        }
    } catch (const YAML::Exception& e) {
        fail(Err::malformed_config, std::string("malformed cluster config: ") + e.what());
    }
    if (cfg.home.empty()) {
        const char* env_home = std::getenv("HOME");
        cfg.home = env_home && *env_home ? env_home : "/tmp";
    }
    return cfg;
}

SimClusterConfig load_cluster_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Err::io, "cannot open cluster config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_cluster_config(buf.str());
}

SimCluster::SimCluster(SimClusterConfig config) : config_(std::move(config)) {
    for (const QueueSpec& q : config_.queues) {
        pending_[q.name] = {};
        for (const std::string& node : q.node_names) node_owner_.emplace(node, "");
    }
}

std::string SimCluster::submit(const std::string& script, const std::string& queue) {
    std::lock_guard lock(mu_);
    const QueueSpec* spec = nullptr;
    for (const QueueSpec& q : config_.queues) {
        if (q.name == queue) {
            spec = &q;
            break;
        }
    }
    if (!spec) fail(Err::no_such_queue, "no queue named '" + queue + "'");

    PbsDirectives d = parse_pbs_directives(script);
    SimDirectives sim = parse_sim_directives(script);

    SimJob job;
    job.queue = queue;
    job.nodes_requested = d.node_count.value_or(1);
    job.declared_runtime = sim.runtime;
    job.declared_exit = sim.exit_code;
    job.stdout_path = d.stdout_path;
    job.stderr_path = d.stderr_path;
    job.walltime_limit_seconds =
        d.walltime_seconds ? d.walltime_seconds : spec->max_walltime_seconds;

    // Admission mirror of qsub: reject what the queue can never run.
    if (d.walltime_seconds && spec->max_walltime_seconds &&
        *d.walltime_seconds > *spec->max_walltime_seconds)
        fail(Err::job_exceeds_queue,
             "walltime " + format_walltime(*d.walltime_seconds) + " exceeds queue '" + queue +
                 "' limit " + format_walltime(*spec->max_walltime_seconds));
    if (job.nodes_requested > spec->max_nodes)
        fail(Err::job_exceeds_queue,
             "job requests " + std::to_string(job.nodes_requested) + " nodes, queue '" + queue +
                 "' has " + std::to_string(spec->max_nodes));

    std::int64_t key = next_seq_++;
    job.sim_id = std::to_string(key) + ".sim";
    jobs_.emplace(key, std::move(job));
    pending_[queue].push_back(key);
    return jobs_.at(key).sim_id;
}

BackendStatus SimCluster::status(const std::string& sim_id) {
    std::lock_guard lock(mu_);
    SimJob* job = find_job(sim_id);
    if (!job) return BackendStatus::unknown();
    return job->state;
}

void SimCluster::cancel(const std::string& sim_id) {
    std::lock_guard lock(mu_);
    SimJob* job = find_job(sim_id);
    if (!job) fail(Err::no_such_job, "no sim job '" + sim_id + "'");
    if (job->state.state == BackendState::Queued) {
        auto& fifo = pending_[job->queue];
        for (auto it = fifo.begin(); it != fifo.end(); ++it) {
            if (jobs_.at(*it).sim_id == sim_id) {
                fifo.erase(it);
                break;
            }
        }
    } else if (job->state.state == BackendState::Running) {
        release_nodes(*job);
    } else {
        return; // finished or already cancelled: idempotent success
    }
    job->state = BackendStatus::unknown();
    job->nodes_held.clear();
    log_.push_back({clock_, SimEvent::Kind::Cancelled, job->sim_id, 0});
}

std::string SimCluster::read_file(const std::string& path) {
    std::string expanded;
    {
        std::lock_guard lock(mu_);
        expanded = expand_variables(path, config_.home);
    }
    std::ifstream in(expanded, std::ios::binary);
    if (!in) fail(Err::source_missing, "no such file on cluster: " + expanded);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<QueueSpec> SimCluster::queues() {
    std::lock_guard lock(mu_);
    return config_.queues;
}

std::vector<SimEvent> SimCluster::tick(int n) {
    if (n < 1) fail(Err::invalid_arg, "tick count must be at least 1");
    std::lock_guard lock(mu_);
    std::vector<SimEvent> events;
    for (int i = 0; i < n; ++i) tick_once(events);
    return events;
}

void SimCluster::tick_once(std::vector<SimEvent>& events) {
    start_eligible(events);
    ++clock_;

    // Elapsed time includes the second that just passed, so a job started
    // this tick with runtime 1 completes this tick.
    for (auto& [key, job] : jobs_) {
        if (job.state.state != BackendState::Running) continue;
        std::int64_t elapsed = clock_ - *job.started_at;
        if (elapsed >= job.declared_runtime) {
            finish_job(job, false, events);
        } else if (job.walltime_limit_seconds && elapsed >= *job.walltime_limit_seconds) {
            finish_job(job, true, events);
        }
    }
}

void SimCluster::start_eligible(std::vector<SimEvent>& events) {
    for (const QueueSpec& q : config_.queues) {
        auto& fifo = pending_[q.name];
        // Strict FIFO: a blocked head blocks the whole queue, no backfill.
        while (!fifo.empty()) {
            SimJob& head = jobs_.at(fifo.front());
            if (head.nodes_requested > free_node_count(q)) break;
            int needed = head.nodes_requested;
            for (const std::string& node : q.node_names) {
                if (needed == 0) break;
                std::string& owner = node_owner_.at(node);
                if (owner.empty()) {
                    owner = head.sim_id;
                    head.nodes_held.push_back(node);
                    --needed;
                }
            }
            head.state = BackendStatus::running();
            head.started_at = clock_;
            fifo.pop_front();
            events.push_back({clock_ + 1, SimEvent::Kind::Started, head.sim_id, 0});
            log_.push_back(events.back());
        }
    }
}

void SimCluster::finish_job(SimJob& job, bool killed, std::vector<SimEvent>& events) {
    int exit_code = killed ? kWalltimeKillExit : job.declared_exit;
    if (!killed && job.stdout_path) {
        // The simulated program output; walltime-killed jobs leave nothing.
        try {
            std::string path = expand_variables(*job.stdout_path, config_.home);
            fs::path parent = fs::path(path).parent_path();
            if (!parent.empty()) {
                std::error_code ec;
                fs::create_directories(parent, ec);
            }
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (out) {
                if (output_fixture_) out << *output_fixture_;
                else out << job.sim_id << " exit " << exit_code << "\n";
            }
        } catch (const WlmError&) {
            // unexpandable output path: the job simply leaves no file
        }
    }
    release_nodes(job);
    job.state = BackendStatus::done(exit_code);
    events.push_back({clock_, killed ? SimEvent::Kind::WalltimeKilled : SimEvent::Kind::Completed,
                      job.sim_id, exit_code});
    log_.push_back(events.back());
}

void SimCluster::release_nodes(SimJob& job) {
    for (const std::string& node : job.nodes_held) {
        auto it = node_owner_.find(node);
        if (it != node_owner_.end() && it->second == job.sim_id) it->second.clear();
    }
    job.nodes_held.clear();
}

int SimCluster::free_node_count(const QueueSpec& q) const {
    int free = 0;
    for (const std::string& node : q.node_names) {
        if (node_owner_.at(node).empty()) ++free;
    }
    return free;
}

SimJob* SimCluster::find_job(const std::string& sim_id) {
    for (auto& [key, job] : jobs_) {
        if (job.sim_id == sim_id) return &job;
    }
    return nullptr;
}

std::int64_t SimCluster::clock() const {
    std::lock_guard lock(mu_);
    return clock_;
}

void SimCluster::set_output_fixture(std::string text) {
    std::lock_guard lock(mu_);
    output_fixture_ = std::move(text);
}

std::vector<SimEvent> SimCluster::event_log() const {
    std::lock_guard lock(mu_);
    return log_;
}

std::optional<SimJob> SimCluster::job(const std::string& sim_id) const {
    std::lock_guard lock(mu_);
    for (const auto& [key, job] : jobs_) {
        if (job.sim_id == sim_id) return job;
    }
    return std::nullopt;
}

std::vector<std::string> SimCluster::pending_ids(const std::string& queue) const {
    std::lock_guard lock(mu_);
    std::vector<std::string> ids;
    auto it = pending_.find(queue);
    if (it == pending_.end()) return ids;
    for (std::int64_t key : it->second) ids.push_back(jobs_.at(key).sim_id);
    return ids;
}

std::vector<std::string> SimCluster::busy_nodes() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> busy;
    for (const auto& [node, owner] : node_owner_) {
        if (!owner.empty()) busy.push_back(node);
    }
    return busy;
}

} // namespace wlmbridge
