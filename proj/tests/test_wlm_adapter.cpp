#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/stat.h>

#include <cstdlib>
#include <limits>

#include "bridge.hpp"
#include "test_util.hpp"
#include "wlm_adapter.hpp"

using namespace wlmbridge;
using testutil::error_code_of;
using testutil::read_fixture;
using testutil::TempDir;

namespace {

void write_stub(const std::string& path, const std::string& body) {
    testutil::write_file(path, "#!/bin/sh\n" + body);
    ::chmod(path.c_str(), 0755);
}

ExecAdapterConfig stub_config(const TempDir& dir, int timeout_ms = 5000) {
    ExecAdapterConfig cfg;
    cfg.qsub = dir.sub("qsub");
    cfg.qstat = dir.sub("qstat");
    cfg.qdel = dir.sub("qdel");
    cfg.temp_dir = dir.str();
    cfg.timeout_ms = timeout_ms;
    return cfg;
}

} // namespace

TEST_CASE("qstat job transcripts map to backend statuses") {
    CHECK(PbsExecAdapter::parse_qstat_job(read_fixture("qstat_q.txt")) == BackendStatus::queued());
    CHECK(PbsExecAdapter::parse_qstat_job(read_fixture("qstat_r.txt")) == BackendStatus::running());
    CHECK(PbsExecAdapter::parse_qstat_job(read_fixture("qstat_e.txt")) == BackendStatus::exiting());
    CHECK(PbsExecAdapter::parse_qstat_job(read_fixture("qstat_c.txt")) == BackendStatus::done(0));
    CHECK(PbsExecAdapter::parse_qstat_job(read_fixture("qstat_c_exit2.txt")) ==
          BackendStatus::done(2));
    CHECK(PbsExecAdapter::parse_qstat_job(read_fixture("qstat_h.txt")) == BackendStatus::held());
    CHECK(PbsExecAdapter::parse_qstat_job(read_fixture("qstat_malformed.txt")) ==
          BackendStatus::unknown());
    CHECK(PbsExecAdapter::parse_qstat_job("") == BackendStatus::unknown());
}

TEST_CASE("qstat queue listing parses execution queues only") {
    auto queues = PbsExecAdapter::parse_qstat_queues(read_fixture("qstat_queues.txt"));
    REQUIRE(queues.size() == 2); // the Route queue is skipped
    CHECK(queues[0].name == "batch");
    CHECK(queues[0].max_walltime_seconds == 3600);
    CHECK(queues[0].max_nodes == 4);
    CHECK(queues[1].name == "gpu");
    CHECK(queues[1].max_walltime_seconds == 86400);
    CHECK(queues[1].max_nodes == std::numeric_limits<int>::max()); // no nodect declared
}

TEST_CASE("submit hands the script to qsub untouched") {
    TempDir dir("exec-submit");
    write_stub(dir.sub("qsub"),
               "cat \"$3\" > " + dir.sub("submitted.txt") + "\n"
               "echo \"$1 $2\" > " + dir.sub("args.txt") + "\n"
               "echo 1234.headnode\n");
    PbsExecAdapter adapter(stub_config(dir));

    // the adapter must not interpret script contents, only deliver them
    std::string script = "#!/bin/sh\n#PBS -l walltime=garbage\n\x01weird bytes\ntrue\n";
    std::string id = adapter.submit(script, "batch");
    CHECK(id == "1234.headnode");
    CHECK(testutil::read_file(dir.sub("submitted.txt")) == script);
    CHECK(testutil::read_file(dir.sub("args.txt")) == "-q batch\n");
}

TEST_CASE("submit failures become BackendUnavailable") {
    TempDir dir("exec-submit-fail");
    SUBCASE("nonzero exit with stderr") {
        write_stub(dir.sub("qsub"), "echo 'qsub: would exceed queue limit' >&2\nexit 1\n");
        PbsExecAdapter adapter(stub_config(dir));
        try {
            adapter.submit("true\n", "batch");
            FAIL("expected BackendUnavailable");
        } catch (const WlmError& e) {
            CHECK(e.code() == Err::backend_unavailable);
            CHECK(std::string(e.what()).find("would exceed queue limit") != std::string::npos);
        }
    }
    SUBCASE("missing binary") {
        PbsExecAdapter adapter(stub_config(dir)); // no qsub stub written
        CHECK(error_code_of([&] { adapter.submit("true\n", "batch"); }) ==
              Err::backend_unavailable);
    }
    SUBCASE("empty stdout") {
        write_stub(dir.sub("qsub"), "exit 0\n");
        PbsExecAdapter adapter(stub_config(dir));
        CHECK(error_code_of([&] { adapter.submit("true\n", "batch"); }) ==
              Err::backend_unavailable);
    }
}

TEST_CASE("status polls qstat -f and tracks purged jobs") {
    TempDir dir("exec-status");
    std::string flag = dir.sub("mode");

    // stub switches from a C transcript to an unknown-id error once polled
    write_stub(dir.sub("qstat"),
               "if [ -f " + flag + " ]; then\n"
               "  echo 'qstat: Unknown Job Id Error 1004.headnode' >&2\n"
               "  exit 153\n"
               "fi\n"
               "cat " + testutil::fixture_path("qstat_c.txt") + "\n");
    PbsExecAdapter adapter(stub_config(dir));

    CHECK(adapter.status("1004.headnode") == BackendStatus::done(0));
    testutil::write_file(flag, "gone");
    // previously seen at C: keep reporting the same exit code
    CHECK(adapter.status("1004.headnode") == BackendStatus::done(0));
    // never seen before: simply unknown
    CHECK(adapter.status("9999.headnode") == BackendStatus::unknown());
}

TEST_CASE("status maps running transcripts") {
    TempDir dir("exec-status-r");
    write_stub(dir.sub("qstat"), "cat " + testutil::fixture_path("qstat_r.txt") + "\n");
    PbsExecAdapter adapter(stub_config(dir));
    CHECK(adapter.status("1002.headnode") == BackendStatus::running());
}

TEST_CASE("status failure without the unknown-id marker is an outage") {
    TempDir dir("exec-status-fail");
    write_stub(dir.sub("qstat"), "echo 'qstat: cannot connect to server' >&2\nexit 1\n");
    PbsExecAdapter adapter(stub_config(dir));
    CHECK(error_code_of([&] { adapter.status("1.x"); }) == Err::backend_unavailable);
}

TEST_CASE("cancel is idempotent for finished jobs") {
    TempDir dir("exec-cancel");
    SUBCASE("clean cancel") {
        write_stub(dir.sub("qdel"), "exit 0\n");
        PbsExecAdapter adapter(stub_config(dir));
        CHECK_NOTHROW(adapter.cancel("1.x"));
    }
    SUBCASE("already completed is success") {
        write_stub(dir.sub("qdel"),
                   "echo 'qdel: job 1.x already completed' >&2\nexit 1\n");
        PbsExecAdapter adapter(stub_config(dir));
        CHECK_NOTHROW(adapter.cancel("1.x"));
    }
    SUBCASE("unrecognized stderr is an outage") {
        write_stub(dir.sub("qdel"), "echo 'qdel: Unknown Job Id 1.x' >&2\nexit 1\n");
        PbsExecAdapter adapter(stub_config(dir));
        CHECK(error_code_of([&] { adapter.cancel("1.x"); }) == Err::backend_unavailable);
    }
}

TEST_CASE("hung binaries hit the invocation timeout") {
    TempDir dir("exec-timeout");
    write_stub(dir.sub("qstat"), "sleep 30\n");
    PbsExecAdapter adapter(stub_config(dir, 200));
    try {
        adapter.status("1.x");
        FAIL("expected BackendUnavailable");
    } catch (const WlmError& e) {
        CHECK(e.code() == Err::backend_unavailable);
        CHECK(std::string(e.what()).find("timed out") != std::string::npos);
    }
}

TEST_CASE("read_file returns bytes or SourceMissing") {
    TempDir dir("exec-read");
    PbsExecAdapter adapter(stub_config(dir));
    testutil::write_file(dir.sub("out.txt"), "payload\x01\x02");
    CHECK(adapter.read_file(dir.sub("out.txt")) == "payload\x01\x02");
    CHECK(error_code_of([&] { adapter.read_file(dir.sub("absent.txt")); }) ==
          Err::source_missing);
}

TEST_CASE("queue discovery runs qstat -Q -f") {
    TempDir dir("exec-queues");
    write_stub(dir.sub("qstat"),
               "echo \"$1 $2\" > " + dir.sub("args.txt") + "\n"
               "cat " + testutil::fixture_path("qstat_queues.txt") + "\n");
    PbsExecAdapter adapter(stub_config(dir));
    auto queues = adapter.queues();
    REQUIRE(queues.size() == 2);
    CHECK(queues[0].name == "batch");
    CHECK(testutil::read_file(dir.sub("args.txt")) == "-Q -f\n");
}

TEST_CASE("the bridge drives a stubbed PBS installation end to end") {
    TempDir dir("exec-bridge");
    std::string state = dir.sub("state");

    write_stub(dir.sub("qsub"), "echo 555.headnode\n");
    write_stub(dir.sub("qstat"),
               "if [ \"$1\" = \"-Q\" ]; then\n"
               "  cat " + testutil::fixture_path("qstat_queues.txt") + "\n"
               "elif [ -f " + state + " ]; then\n"
               "  cat " + testutil::fixture_path("qstat_c.txt") + "\n"
               "else\n"
               "  cat " + testutil::fixture_path("qstat_r.txt") + "\n"
               "fi\n");
    write_stub(dir.sub("qdel"), "exit 0\n");
    ::setenv("WLMBRIDGE_QSUB", dir.sub("qsub").c_str(), 1);
    ::setenv("WLMBRIDGE_QSTAT", dir.sub("qstat").c_str(), 1);
    ::setenv("WLMBRIDGE_QDEL", dir.sub("qdel").c_str(), 1);

    auto bridge = Bridge::with_pbs_backend(dir.str());
    auto nodes = bridge->registry().snapshot();
    REQUIRE(nodes.size() == 2); // batch and gpu from the queue listing
    CHECK(nodes[0].queue.name == "batch");

    JobManifest m = parse_manifest(
        "kind: TorqueJob\nmetadata:\n  name: real\nspec:\n  batch: |\n    #!/bin/sh\n"
        "    #PBS -l walltime=00:30:00\n    true\n");
    JobRecord r = bridge->store().submit_job(m);
    CHECK(r.state == JobState::Submitted);
    CHECK(r.backend_job_id == "555.headnode");
    CHECK(r.queue_name == "batch");

    bridge->reconcile(); // qstat reports R
    CHECK(bridge->store().get(r.uid)->state == JobState::Running);

    testutil::write_file(state, "done");
    bridge->reconcile(); // qstat reports C with exit 0
    JobRecord done = *bridge->store().get(r.uid);
    CHECK(done.state == JobState::Completed);
    CHECK(done.exit_code == 0);

    ::unsetenv("WLMBRIDGE_QSUB");
    ::unsetenv("WLMBRIDGE_QSTAT");
    ::unsetenv("WLMBRIDGE_QDEL");
}

TEST_CASE("binary paths come from the environment") {
    ::setenv("WLMBRIDGE_QSUB", "/opt/pbs/qsub", 1);
    ::setenv("WLMBRIDGE_QSTAT", "/opt/pbs/qstat", 1);
    ::setenv("WLMBRIDGE_QDEL", "/opt/pbs/qdel", 1);
    ExecAdapterConfig cfg = PbsExecAdapter::config_from_env();
    CHECK(cfg.qsub == "/opt/pbs/qsub");
    CHECK(cfg.qstat == "/opt/pbs/qstat");
    CHECK(cfg.qdel == "/opt/pbs/qdel");
    ::unsetenv("WLMBRIDGE_QSUB");
    ::unsetenv("WLMBRIDGE_QSTAT");
    ::unsetenv("WLMBRIDGE_QDEL");
    cfg = PbsExecAdapter::config_from_env();
    CHECK(cfg.qsub == "qsub");
    CHECK(cfg.timeout_ms == 30000);
}
