#pragma once

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include "redbox.hpp"

namespace wlmbridge {

// The red-box analog: a local RPC endpoint over a Unix stream socket.
// Connections are handled concurrently, requests on one connection in
// order. A stale socket file left by a dead server is removed and rebound;
// a live one is AddressInUse.
class RedboxServer {
public:
    RedboxServer(std::string socket_path, JobStore& store, VirtualNodeRegistry& registry);
    ~RedboxServer();

    RedboxServer(const RedboxServer&) = delete;
    RedboxServer& operator=(const RedboxServer&) = delete;

    void start();
    void stop();

    const std::string& socket_path() const { return socket_path_; }

private:
    void accept_loop();
    void serve_connection(int fd);
    void dispatch(int fd, const RpcFrame& request);

    std::string socket_path_;
    JobStore& store_;
    VirtualNodeRegistry& registry_;

    int listen_fd_ = -1;
    int wake_pipe_[2] = {-1, -1}; // poked by stop() to unblock the acceptor
    std::atomic<bool> stopping_{false};
    std::thread accept_thread_;
    std::mutex mu_;
    std::set<int> connections_;
    int active_workers_ = 0; // detached; stop() waits for them to drain
    std::condition_variable workers_done_;
};

} // namespace wlmbridge
