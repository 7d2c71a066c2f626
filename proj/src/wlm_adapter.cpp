#include "wlm_adapter.hpp"

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "command.hpp"
#include "strutil.hpp"

namespace fs = std::filesystem;

namespace wlmbridge {

const char* to_string(BackendState s) {
    switch (s) {
        case BackendState::Queued: return "queued";
        case BackendState::Running: return "running";
        case BackendState::Exiting: return "exiting";
        case BackendState::Done: return "done";
        case BackendState::Held: return "held";
        case BackendState::Unknown: return "unknown";
    }
    return "unknown";
}

namespace {

// "    key = value" lines of qstat long output.
bool keyed_line(const std::string& line, std::string& key, std::string& value) {
    auto eq = line.find('=');
    if (eq == std::string::npos) return false;
    key = trim(line.substr(0, eq));
    value = trim(line.substr(eq + 1));
    return !key.empty();
}

std::string first_line_trimmed(const std::string& text) {
    auto nl = text.find('\n');
    return trim(nl == std::string::npos ? text : text.substr(0, nl));
}

[[noreturn]] void command_failed(const std::string& what, const CommandResult& res) {
    std::string detail;
    if (res.spawn_failed) detail = "could not execute binary";
    else if (res.timed_out) detail = "timed out";
    else detail = "exit " + std::to_string(res.exit_code) + ": " + trim(res.err);
    fail(Err::backend_unavailable, what + " failed (" + detail + ")");
}

// Script file that lives exactly as long as the qsub invocation.
class TempScript {
public:
    TempScript(const std::string& dir, const std::string& script) {
        fs::path base = dir.empty() ? fs::temp_directory_path() : fs::path(dir);
        std::string tmpl = (base / "wlmbridge-XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        int fd = ::mkstemp(buf.data());
        if (fd < 0) fail(Err::io, "cannot create temp script under " + base.string());
        path_ = buf.data();
        ssize_t n = ::write(fd, script.data(), script.size());
        ::close(fd);
        if (n != static_cast<ssize_t>(script.size())) {
            ::unlink(path_.c_str());
            fail(Err::io, "short write to temp script " + path_);
        }
    }
    ~TempScript() { ::unlink(path_.c_str()); }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

} // namespace

ExecAdapterConfig PbsExecAdapter::config_from_env() {
    ExecAdapterConfig cfg;
    if (const char* v = std::getenv("WLMBRIDGE_QSUB")) cfg.qsub = v;
    if (const char* v = std::getenv("WLMBRIDGE_QSTAT")) cfg.qstat = v;
    if (const char* v = std::getenv("WLMBRIDGE_QDEL")) cfg.qdel = v;
    return cfg;
}

PbsExecAdapter::PbsExecAdapter(ExecAdapterConfig config) : config_(std::move(config)) {}

std::string PbsExecAdapter::submit(const std::string& script, const std::string& queue) {
    TempScript file(config_.temp_dir, script);
    CommandResult res = run_command({config_.qsub, "-q", queue, file.path()}, config_.timeout_ms);
    if (!res.ok()) command_failed("qsub", res);
    std::string id = first_line_trimmed(res.out);
    if (id.empty()) fail(Err::backend_unavailable, "qsub produced no job id");
    return id;
}

BackendStatus PbsExecAdapter::status(const std::string& backend_id) {
    CommandResult res = run_command({config_.qstat, "-f", backend_id}, config_.timeout_ms);
    if (res.ok()) {
        BackendStatus st = parse_qstat_job(res.out);
        if (st.state == BackendState::Done) {
            std::lock_guard lock(mu_);
            last_exit_[backend_id] = st.exit_code;
        }
        return st;
    }
    if (!res.spawn_failed && !res.timed_out &&
        to_lower(res.err).find("unknown job id") != std::string::npos) {
        // The server purges finished jobs; keep reporting the exit code we
        // saw at state C, otherwise the job is simply gone.
        std::lock_guard lock(mu_);
        auto it = last_exit_.find(backend_id);
        if (it != last_exit_.end()) return BackendStatus::done(it->second);
        return BackendStatus::unknown();
    }
    command_failed("qstat", res);
}

void PbsExecAdapter::cancel(const std::string& backend_id) {
    CommandResult res = run_command({config_.qdel, backend_id}, config_.timeout_ms);
    if (res.ok()) return;
    if (!res.spawn_failed && !res.timed_out &&
        to_lower(res.err).find("already completed") != std::string::npos)
        return; // cancel after completion is a success
    command_failed("qdel", res);
}

std::string PbsExecAdapter::read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Err::source_missing, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) fail(Err::io, "read error on " + path);
    return buf.str();
}

std::vector<QueueSpec> PbsExecAdapter::queues() {
    CommandResult res = run_command({config_.qstat, "-Q", "-f"}, config_.timeout_ms);
    if (!res.ok()) command_failed("qstat -Q", res);
    return parse_qstat_queues(res.out);
}

BackendStatus PbsExecAdapter::parse_qstat_job(const std::string& text) {
    std::string state;
    int exit_code = 0;
    std::string key, value;
    for (const std::string& line : split_lines(text)) {
        if (!keyed_line(line, key, value)) continue;
        if (key == "job_state") state = value;
        else if (key == "exit_status" && is_digits(value)) exit_code = std::stoi(value);
    }
    if (state == "Q") return BackendStatus::queued();
    if (state == "R") return BackendStatus::running();
    if (state == "E") return BackendStatus::exiting();
    if (state == "C") return BackendStatus::done(exit_code);
    if (state == "H") return BackendStatus::held();
    return BackendStatus::unknown();
}

std::vector<QueueSpec> PbsExecAdapter::parse_qstat_queues(const std::string& text) {
    std::vector<QueueSpec> result;
    QueueSpec current;
    std::string queue_type;
    bool open = false;

    auto flush = [&]() {
        if (open && (queue_type.empty() || queue_type == "Execution")) result.push_back(current);
        current = QueueSpec{};
        current.max_nodes = std::numeric_limits<int>::max();
        queue_type.clear();
    };

    flush();
    open = false;
    for (const std::string& line : split_lines(text)) {
        std::string t = trim(line);
        if (t.rfind("Queue:", 0) == 0) {
            flush();
            current.name = trim(t.substr(6));
            open = true;
            continue;
        }
        std::string key, value;
        if (!open || !keyed_line(line, key, value)) continue;
        if (key == "queue_type") queue_type = value;
        else if (key == "resources_max.walltime") {
            try {
                current.max_walltime_seconds = parse_walltime(value);
            } catch (const WlmError&) {
            }
        } else if ((key == "resources_max.nodect" || key == "resources_available.nodect") &&
                 is_digits(value))
            current.max_nodes = std::stoi(value);
    }
    flush();
    return result;
}

} // namespace wlmbridge
