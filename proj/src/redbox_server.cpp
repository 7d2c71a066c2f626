#include "redbox_server.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace wlmbridge {

namespace {

sockaddr_un make_address(const std::string& path) {
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (path.size() >= sizeof(addr.sun_path))
        fail(Err::invalid_arg, "socket path too long: " + path);
    std::strncpy(addr.sun_path, path.c_str(), sizeof(addr.sun_path) - 1);
    return addr;
}

// True when something is still accepting on the socket.
bool socket_is_live(const std::string& path) {
    int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd < 0) return false;
    sockaddr_un addr = make_address(path);
    int rc = ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    ::close(fd);
    return rc == 0;
}

} // namespace

RedboxServer::RedboxServer(std::string socket_path, JobStore& store,
                           VirtualNodeRegistry& registry)
    : socket_path_(std::move(socket_path)), store_(store), registry_(registry) {}

RedboxServer::~RedboxServer() { stop(); }

void RedboxServer::start() {
    std::error_code ec;
    if (std::filesystem::exists(socket_path_, ec)) {
        if (socket_is_live(socket_path_))
            fail(Err::address_in_use, "another server is serving " + socket_path_);
        ::unlink(socket_path_.c_str());
    }

    listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (listen_fd_ < 0) fail(Err::transport, std::string("socket: ") + std::strerror(errno));
    sockaddr_un addr = make_address(socket_path_);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        int saved = errno;
        ::close(listen_fd_);
        listen_fd_ = -1;
        fail(saved == EADDRINUSE ? Err::address_in_use : Err::transport,
             "bind " + socket_path_ + ": " + std::strerror(saved));
    }
    if (::listen(listen_fd_, 64) != 0) {
        int saved = errno;
        ::close(listen_fd_);
        listen_fd_ = -1;
        fail(Err::transport, "listen " + socket_path_ + ": " + std::strerror(saved));
    }
    if (::pipe(wake_pipe_) != 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        fail(Err::transport, std::string("pipe: ") + std::strerror(errno));
    }
    stopping_ = false;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void RedboxServer::stop() {
    if (listen_fd_ < 0 && !accept_thread_.joinable()) return;
    stopping_ = true;
    if (wake_pipe_[1] >= 0) {
        char byte = 0;
        [[maybe_unused]] ssize_t n = ::write(wake_pipe_[1], &byte, 1);
    }
    {
        std::lock_guard lock(mu_);
        for (int fd : connections_) ::shutdown(fd, SHUT_RDWR);
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    {
        std::unique_lock lock(mu_);
        workers_done_.wait(lock, [this] { return active_workers_ == 0; });
    }
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    for (int& fd : wake_pipe_) {
        if (fd >= 0) {
            ::close(fd);
            fd = -1;
        }
    }
    ::unlink(socket_path_.c_str());
}

void RedboxServer::accept_loop() {
    while (!stopping_) {
        struct pollfd fds[2] = {{listen_fd_, POLLIN, 0}, {wake_pipe_[0], POLLIN, 0}};
        int rc = ::poll(fds, 2, -1);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (fds[1].revents || stopping_) break;
        if (!(fds[0].revents & POLLIN)) continue;
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            break;
        }
        {
            std::lock_guard lock(mu_);
            connections_.insert(fd);
            ++active_workers_;
        }
        std::thread([this, fd] { serve_connection(fd); }).detach();
    }
}

void RedboxServer::serve_connection(int fd) {
    // One in-flight request at a time; transport or framing trouble tears
    // down this connection only.
    for (;;) {
        RpcFrame request;
        try {
            request = read_frame_fd(fd);
        } catch (const WlmError&) {
            break;
        }
        try {
            dispatch(fd, request);
        } catch (const WlmError& e) {
            RpcFrame resp;
            resp.method_id = request.method_id | kResponseBit;
            resp.request_id = request.request_id;
            resp.payload = encode_error(e.code(), e.what());
            try {
                write_frame_fd(fd, resp);
            } catch (const WlmError&) {
                break;
            }
        } catch (const std::exception& e) {
            RpcFrame resp;
            resp.method_id = request.method_id | kResponseBit;
            resp.request_id = request.request_id;
            resp.payload = encode_error(Err::internal, e.what());
            try {
                write_frame_fd(fd, resp);
            } catch (const WlmError&) {
                break;
            }
        }
    }
    ::close(fd);
    // last touch of server state: stop() waits on this count
    std::lock_guard lock(mu_);
    connections_.erase(fd);
    --active_workers_;
    workers_done_.notify_all();
}

namespace {

RpcJobInfo job_info_from_record(const JobRecord& record, std::int64_t now_ms) {
    RpcJobInfo info;
    info.backend_id = record.backend_job_id.value_or("");
    info.exit_code = record.exit_code;
    info.failure_reason = record.failure_reason;
    info.name = record.manifest.name;
    info.queue = record.queue_name;
    info.state = to_string(record.state);
    info.uid = record.uid;
    for (const Transition& t : record.transition_log)
        info.transitions.push_back({t.at_ms, to_string(t.state)});
    if (!record.transition_log.empty())
        info.age_seconds = (now_ms - record.transition_log.front().at_ms) / 1000;
    return info;
}

} // namespace

void RedboxServer::dispatch(int fd, const RpcFrame& request) {
    RpcFrame resp;
    resp.method_id = request.method_id | kResponseBit;
    resp.request_id = request.request_id;

    auto resolve = [this](const std::string& name) -> JobRecord {
        if (auto record = store_.find_by_name(name)) return *record;
        if (auto record = store_.get(name)) return *record; // allow uid lookups
        fail(Err::no_such_job, "no job named '" + name + "'");
    };

    switch (static_cast<RpcMethod>(request.method_id & ~kResponseBit)) {
        case RpcMethod::SubmitJob: {
            JobManifest manifest = parse_manifest(decode_submit_request(request.payload));
            JobRecord record = store_.submit_job(manifest);
            store_.sync_registry_counts();
            resp.payload = encode_submit_result(
                {record.manifest.name, to_string(record.state), record.uid});
            write_frame_fd(fd, resp);
            return;
        }
        case RpcMethod::JobStatus: {
            JobRecord record = resolve(decode_name_request(request.payload));
            resp.payload = encode_job_info(job_info_from_record(record, store_.clock().now_ms()));
            write_frame_fd(fd, resp);
            return;
        }
        case RpcMethod::CancelJob: {
            JobRecord record = resolve(decode_name_request(request.payload));
            record = store_.cancel_job(record.uid);
            store_.sync_registry_counts();
            resp.payload = encode_submit_result(
                {record.manifest.name, to_string(record.state), record.uid});
            write_frame_fd(fd, resp);
            return;
        }
        case RpcMethod::ListJobs: {
            std::vector<RpcJobRow> rows;
            for (const JobRow& row : store_.list_jobs()) rows.push_back({row.age, row.name, row.status});
            resp.payload = encode_job_rows(rows);
            write_frame_fd(fd, resp);
            return;
        }
        case RpcMethod::FetchResults: {
            JobRecord record = resolve(decode_name_request(request.payload));
            if (record.collected_paths.empty())
                fail(Err::results_unavailable,
                     "job '" + record.manifest.name + "' has no collected results (state " +
                         to_string(record.state) + ")");
            const std::string& path = record.collected_paths.front();
            std::ifstream in(path, std::ios::binary);
            if (!in) fail(Err::results_unavailable, "collected file " + path + " is gone");
            std::string filename = std::filesystem::path(path).filename().string();
            RpcResultChunk chunk;
            chunk.filename = filename;
            char buf[kResultChunkSize];
            while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
                chunk.data.assign(buf, static_cast<std::size_t>(in.gcount()));
                chunk.eof = false;
                resp.payload = encode_result_chunk(chunk);
                write_frame_fd(fd, resp);
            }
            chunk.data.clear();
            chunk.eof = true;
            resp.payload = encode_result_chunk(chunk);
            write_frame_fd(fd, resp);
            return;
        }
        case RpcMethod::ListQueues: {
            std::vector<RpcQueueInfo> queues;
            for (const VirtualNode& node : registry_.snapshot()) {
                RpcQueueInfo info;
                info.jobs_pending = node.jobs_pending;
                info.jobs_running = node.jobs_running;
                info.max_nodes = node.queue.max_nodes;
                info.max_walltime_seconds = node.queue.max_walltime_seconds;
                info.name = node.queue.name;
                info.nodes = node.queue.node_names;
                queues.push_back(std::move(info));
            }
            resp.payload = encode_queue_infos(queues);
            write_frame_fd(fd, resp);
            return;
        }
    }
    fail(Err::malformed_frame, "unknown method id " + std::to_string(request.method_id));
}

} // namespace wlmbridge
