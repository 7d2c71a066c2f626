// Acceptance suite: runs each criterion end to end and prints one PASS/FAIL
// line per criterion. Exits nonzero when any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "bridge.hpp"
#include "command.hpp"
#include "lifecycle.hpp"
#include "manifest.hpp"
#include "redbox_client.hpp"
#include "simbatch.hpp"

#ifndef WLMB_FIXTURE_DIR
#define WLMB_FIXTURE_DIR "."
#endif
#ifndef WLMB_CLI
#define WLMB_CLI "wlmbridge"
#endif

using namespace wlmbridge;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fixture(const std::string& name) {
    return slurp(std::string(WLMB_FIXTURE_DIR) + "/" + name);
}

struct Scratch {
    explicit Scratch(const std::string& tag) {
        dir = fs::temp_directory_path() / ("wlmb-accept-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string sub(const std::string& name) const { return (dir / name).string(); }
    fs::path dir;
};

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

CommandResult cli(const std::vector<std::string>& args) {
    std::vector<std::string> argv = {WLMB_CLI};
    argv.insert(argv.end(), args.begin(), args.end());
    return run_command(argv, 15000);
}

// --- criterion 1: cow job end to end through the CLI ----------------------

bool cow_end_to_end(std::string& detail) {
    Check c;
    Scratch scratch("cow");
    std::string cowsay = fixture("cowsay.txt");

    auto bridge = Bridge::with_sim_backend(parse_cluster_config(
        "queues:\n  - name: batch\n    max_walltime: 3600\n    nodes: [node1]\nhome: " +
        scratch.dir.string() + "\n"));
    bridge->sim()->set_output_fixture(cowsay);
    std::string socket_path = scratch.sub("redbox.sock");
    bridge->serve(socket_path);
    ::setenv("WLMBRIDGE_SOCKET", socket_path.c_str(), 1);

    std::string manifest_path = scratch.sub("cow_job.yaml");
    std::ofstream(manifest_path) << fixture("cow_job_sim.yaml");

    CommandResult apply = cli({"apply", "-f", manifest_path});
    c.expect(apply.exit_code == 0, "apply exited " + std::to_string(apply.exit_code) + ": " + apply.err);
    c.expect(apply.out.find("torquejob/cow created") != std::string::npos,
             "apply output was: " + apply.out);

    bridge->tick(2); // inside the tick 1..4 window; the job is running
    CommandResult get = cli({"get"});
    c.expect(get.exit_code == 0, "get exited " + std::to_string(get.exit_code));
    std::istringstream lines(get.out);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    c.expect(header == "NAME   AGE   STATUS", "header was '" + header + "'");
    c.expect(std::regex_match(row, std::regex("^cow\\s+\\S+\\s+running\\s*$")),
             "row during ticks 1-4 was '" + row + "'");

    bridge->tick(3); // through tick 5: the sim job completes
    bridge->reconcile();
    CommandResult get2 = cli({"get"});
    std::istringstream lines2(get2.out);
    std::getline(lines2, header);
    std::getline(lines2, row);
    c.expect(std::regex_match(row, std::regex("^cow\\s+\\S+\\s+completed\\s*$")),
             "row after tick 5 was '" + row + "'");

    std::string dest = scratch.sub("low.out");
    c.expect(fs::exists(dest), "destination $HOME/low.out missing");
    if (fs::exists(dest)) c.expect(slurp(dest) == cowsay, "destination bytes differ from Fig. 5 text");

    bridge->stop();
    detail = c.detail;
    return c.ok;
}

// --- criterion 2: directive extraction ------------------------------------

bool directive_extraction(std::string& detail) {
    Check c;
    JobManifest m = parse_manifest(fixture("cow_job.yaml"));
    PbsDirectives d = parse_pbs_directives(m.batch_script);
    c.expect(d.walltime_seconds == 1800, "walltime_seconds");
    c.expect(d.node_count == 1, "node_count");
    c.expect(d.stderr_path == "$HOME/low.err", "stderr_path");
    c.expect(d.stdout_path == "$HOME/low.out", "stdout_path");
    c.expect(!d.queue_name.has_value(), "queue_name should be absent");
    detail = c.detail;
    return c.ok;
}

// --- criterion 3: admission rejects before any backend call ----------------

bool admission_rejects_early(std::string& detail) {
    Check c;
    Scratch scratch("admission");
    auto bridge = Bridge::with_sim_backend(parse_cluster_config(
        "queues:\n  - name: batch\n    max_walltime: 3600\n    nodes: [n1, n2]\nhome: " +
        scratch.dir.string() + "\n"));

    JobManifest m = parse_manifest(
        "kind: TorqueJob\nmetadata:\n  name: slow\nspec:\n  batch: |\n    #!/bin/sh\n"
        "    #PBS -l walltime=02:00:00\n    true\n");
    JobRecord record = bridge->store().submit_job(m);

    c.expect(record.state == JobState::Failed, "record should be Failed");
    c.expect(record.failure_reason.find("NoFeasibleQueue") != std::string::npos,
             "failure reason was: " + record.failure_reason);
    c.expect(!record.backend_job_id.has_value(), "no backend id should be set");
    c.expect(bridge->sim()->event_log().empty() && bridge->sim()->pending_ids("batch").empty(),
             "the backend saw a submission");
    detail = c.detail;
    return c.ok;
}

// --- criterion 4: state machine golden table + fuzz ------------------------

bool state_machine_suite(std::string& detail) {
    using K = JobEvent::Kind;
    using S = JobState;
    Check c;

    const std::vector<S> states = {S::Pending,      S::Submitted, S::Queued,  S::Running,
                                   S::Transferring, S::Completed, S::Failed,  S::Cancelled};
    const std::vector<K> events = {K::SubmitOk,        K::SubmitErr,  K::BackendQueued,
                                   K::BackendRunning,  K::BackendDone, K::BackendFailed,
                                   K::TransferStarted, K::TransferOk,  K::TransferErr,
                                   K::CancelRequested};
    const std::map<std::pair<S, K>, S> golden = {
        {{S::Pending, K::SubmitOk}, S::Submitted},
        {{S::Pending, K::SubmitErr}, S::Failed},
        {{S::Submitted, K::BackendQueued}, S::Queued},
        {{S::Submitted, K::BackendFailed}, S::Failed},
        {{S::Queued, K::BackendRunning}, S::Running},
        {{S::Queued, K::BackendFailed}, S::Failed},
        {{S::Queued, K::CancelRequested}, S::Cancelled},
        {{S::Running, K::BackendDone}, S::Transferring},
        {{S::Running, K::TransferStarted}, S::Transferring},
        {{S::Running, K::BackendFailed}, S::Failed},
        {{S::Running, K::CancelRequested}, S::Cancelled},
        {{S::Transferring, K::TransferOk}, S::Completed},
        {{S::Transferring, K::TransferErr}, S::Failed},
    };

    int entries = 0;
    for (S state : states) {
        for (K event : events) {
            ++entries;
            auto expected = golden.find({state, event});
            auto actual = apply_event(state, event, true);
            if (expected == golden.end()) {
                c.expect(!actual.has_value(), std::string("expected illegal: ") + to_string(state) +
                                                  " + " + to_string(event));
            } else {
                c.expect(actual.has_value() && *actual == expected->second,
                         std::string("wrong target for ") + to_string(state) + " + " +
                             to_string(event));
            }
        }
    }
    c.expect(entries == 80, "table should have 80 entries");

    std::mt19937 rng(2024);
    for (int run = 0; run < 1000; ++run) {
        S state = S::Pending;
        bool has_results = rng() % 2 == 0;
        for (int step = 0; step < 25; ++step) {
            K event = events[rng() % events.size()];
            auto next = apply_event(state, event, has_results);
            if (is_terminal(state)) {
                c.expect(!next.has_value(), "terminal state accepted an event");
                continue;
            }
            if (next) {
                state = *next;
            } else {
                state = S::Failed; // the reconciler freezes on anomalies, loudly
            }
        }
    }
    detail = c.detail;
    return c.ok;
}

// --- criterion 5: simulator audit over a seeded workload -------------------

struct AuditOutcome {
    std::vector<SimEvent> log;
    bool capacity_ok = true;
    bool fifo_ok = true;
    int jobs_submitted = 0;
};

AuditOutcome run_audit(std::uint32_t seed, const std::string& home) {
    // 8 distinct nodes across 3 queues; "shared" belongs to all three
    SimCluster sim(parse_cluster_config(
        "queues:\n"
        "  - name: small\n    max_walltime: 600\n    nodes: [s1, s2, shared]\n"
        "  - name: med\n    nodes: [m1, m2, shared]\n"
        "  - name: big\n    nodes: [b1, b2, b3, shared]\nhome: " + home + "\n"));
    const std::map<std::string, int> caps = {{"small", 3}, {"med", 3}, {"big", 4}};

    std::mt19937 rng(seed);
    AuditOutcome out;
    std::map<std::string, std::vector<std::string>> submitted;
    std::vector<std::string> ids;

    int to_submit = 200;
    while (to_submit > 0 || !sim.busy_nodes().empty() ||
           !(sim.pending_ids("small").empty() && sim.pending_ids("med").empty() &&
             sim.pending_ids("big").empty())) {
        for (int burst = static_cast<int>(rng() % 4); burst > 0 && to_submit > 0; --burst) {
            const char* queues[] = {"small", "med", "big"};
            std::string queue = queues[rng() % 3];
            int nodes = 1 + static_cast<int>(rng() % caps.at(queue));
            std::string script = "#!/bin/sh\n#PBS -l nodes=" + std::to_string(nodes) +
                                 "\n#SIM runtime=" + std::to_string(rng() % 5) + "\ntrue\n";
            std::string id = sim.submit(script, queue);
            submitted[queue].push_back(id);
            ids.push_back(id);
            ++out.jobs_submitted;
            --to_submit;
        }
        sim.tick(1);

        std::map<std::string, int> in_use;
        for (const std::string& id : ids) {
            auto job = sim.job(id);
            if (job && job->state.state == BackendState::Running)
                in_use[job->queue] += static_cast<int>(job->nodes_held.size());
        }
        for (const auto& [queue, used] : in_use) {
            if (used > caps.at(queue)) out.capacity_ok = false;
        }
    }

    std::map<std::string, std::vector<std::string>> started;
    for (const SimEvent& e : sim.event_log()) {
        if (e.kind != SimEvent::Kind::Started) continue;
        auto job = sim.job(e.sim_id);
        if (job) started[job->queue].push_back(e.sim_id);
    }
    for (const auto& [queue, order] : started) {
        if (order != submitted[queue]) out.fifo_ok = false;
    }
    out.log = sim.event_log();
    return out;
}

bool simulator_audit(std::string& detail) {
    Check c;
    Scratch scratch("audit");
    AuditOutcome first = run_audit(20240810, scratch.dir.string());
    c.expect(first.jobs_submitted == 200, "should submit 200 jobs");
    c.expect(first.capacity_ok, "node capacity exceeded");
    c.expect(first.fifo_ok, "FIFO order violated");

    AuditOutcome replay = run_audit(20240810, scratch.dir.string());
    c.expect(first.log == replay.log, "replay with the same seed diverged");
    detail = c.detail;
    return c.ok;
}

// --- criterion 6: RPC soak + frame fuzz ------------------------------------

bool rpc_soak(std::string& detail) {
    Check c;
    Scratch scratch("soak");
    auto bridge = Bridge::with_sim_backend(parse_cluster_config(
        "queues:\n  - name: batch\n    max_walltime: 3600\n    nodes: [n1, n2, n3, n4]\nhome: " +
        scratch.dir.string() + "\n"));
    std::string socket_path = scratch.sub("soak.sock");
    bridge->serve(socket_path);

    std::vector<std::thread> threads;
    std::mutex mu;
    std::set<std::string> uids;
    std::atomic<int> errors{0};
    for (int t = 0; t < 20; ++t) {
        threads.emplace_back([&, t] {
            try {
                RedboxClient client(socket_path);
                for (int i = 0; i < 5; ++i) {
                    std::string name = "soak-" + std::to_string(t) + "-" + std::to_string(i);
                    std::string manifest = "kind: TorqueJob\nmetadata:\n  name: " + name +
                                           "\nspec:\n  batch: |\n    #!/bin/sh\n    #SIM runtime=" +
                                           std::to_string(i % 3) + "\n    true\n";
                    // the client verifies the request_id echo on every call
                    RpcSubmitResult r = client.submit(manifest);
                    if (r.name != name) ++errors;
                    client.job_status(name);
                    std::lock_guard lock(mu);
                    uids.insert(r.uid);
                }
            } catch (const WlmError&) {
                ++errors;
            }
        });
    }
    for (auto& t : threads) t.join();
    c.expect(errors == 0, "client errors or response mismatches: " + std::to_string(errors));
    c.expect(uids.size() == 100, "expected 100 distinct uids, got " + std::to_string(uids.size()));

    // every job reaches a terminal state under ticking
    bool all_terminal = false;
    for (int tick = 0; tick < 200 && !all_terminal; ++tick) {
        bridge->tick(1);
        all_terminal = true;
        for (const JobRow& row : bridge->store().list_jobs()) {
            if (row.status != "completed" && row.status != "failed" && row.status != "cancelled")
                all_terminal = false;
        }
    }
    c.expect(all_terminal, "jobs stuck in non-terminal states after 200 ticks");

    // frame fuzz: ten thousand random buffers, no crash
    std::mt19937 rng(66);
    for (int i = 0; i < 10'000; ++i) {
        std::string bytes;
        std::size_t len = rng() % 80;
        for (std::size_t b = 0; b < len; ++b) bytes.push_back(static_cast<char>(rng()));
        try {
            decode_frame(bytes);
        } catch (const WlmError&) {
        }
    }

    bridge->stop();
    detail = c.detail;
    return c.ok;
}

// --- criterion 7: round-trip identities ------------------------------------

bool round_trips(std::string& detail) {
    Check c;
    std::mt19937 rng(777);

    for (int i = 0; i < 50; ++i) {
        JobManifest m;
        m.kind = "TorqueJob";
        m.api_version = rng() % 2 ? "wlm.sylabs.io/v1alpha1" : "";
        m.name = "rt-" + std::to_string(i);
        std::string script = "#!/bin/sh\n";
        for (unsigned d = 0; d < 1 + rng() % 4; ++d) {
            switch (rng() % 4) {
                case 0: script += "#PBS -l walltime=0" + std::to_string(rng() % 10) + ":30:00\n"; break;
                case 1: script += "#PBS -l nodes=" + std::to_string(1 + rng() % 9) + "\n"; break;
                case 2: script += "#PBS -o $HOME/o" + std::to_string(rng() % 10) + ".out\n"; break;
                case 3: script += "#PBS -q q" + std::to_string(rng() % 5) + "\n"; break;
            }
        }
        script += "echo run " + std::to_string(rng()) + "\n";
        m.batch_script = script;
        if (rng() % 2) {
            ResultsSpec r;
            r.from_path = "$HOME/o.out";
            r.mount_name = "data";
            r.host_path = "$HOME/res";
            r.create_mode = rng() % 2 ? CreateMode::DirectoryOrCreate : CreateMode::Directory;
            m.results = r;
        }
        JobManifest back = parse_manifest(serialize_manifest(m));
        if (!(back == m)) {
            c.expect(false, "manifest round-trip diverged for case " + std::to_string(i));
            break;
        }
    }

    std::uniform_int_distribution<std::int64_t> dist(0, 359999);
    for (int i = 0; i < 1000; ++i) {
        std::int64_t s = dist(rng);
        if (parse_walltime(format_walltime(s)) != s) {
            c.expect(false, "walltime identity failed at " + std::to_string(s));
            break;
        }
    }
    c.expect(parse_walltime(format_walltime(0)) == 0, "walltime identity at 0");
    c.expect(parse_walltime(format_walltime(359999)) == 359999, "walltime identity at 359999");
    detail = c.detail;
    return c.ok;
}

struct Criterion {
    int number;
    std::string title;
    double budget_seconds; // 0 = no stated bound
    std::function<bool(std::string&)> run;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "cow job end-to-end reproduces the paper's run", 2.0, cow_end_to_end},
        {2, "directive extraction from the cow script", 0.0, directive_extraction},
        {3, "admission rejects infeasible jobs before the backend", 0.0, admission_rejects_early},
        {4, "state-machine golden table and event fuzz", 1.0, state_machine_suite},
        {5, "simulator audit: capacity, FIFO, replay determinism", 5.0, simulator_audit},
        {6, "RPC soak: 20 clients x 5 jobs and frame fuzz", 10.0, rpc_soak},
        {7, "manifest and walltime round-trip identities", 0.0, round_trips},
    };

    int failed = 0;
    for (const Criterion& criterion : criteria) {
        std::string detail;
        bool ok = false;
        auto start = std::chrono::steady_clock::now();
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("exception: ") + e.what();
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ok && criterion.budget_seconds > 0 && elapsed > criterion.budget_seconds) {
            ok = false;
            detail = "exceeded expected runtime of " + std::to_string(criterion.budget_seconds) +
                     " s";
        }
        std::printf("%s  criterion %d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", criterion.number,
                    criterion.title.c_str(), elapsed, detail.empty() ? "" : " -- ",
                    detail.c_str());
        if (!ok) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
