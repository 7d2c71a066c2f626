#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "redbox.hpp"

namespace wlmbridge {

// Socket client for the red-box endpoint. Pure transport: every verb is one
// request/response exchange; server-side errors come back as WlmError with
// the original code.
class RedboxClient {
public:
    explicit RedboxClient(const std::string& socket_path); // throws TransportError
    ~RedboxClient();

    RedboxClient(const RedboxClient&) = delete;
    RedboxClient& operator=(const RedboxClient&) = delete;

    RpcSubmitResult submit(const std::string& manifest_text);
    RpcJobInfo job_status(const std::string& name);
    RpcSubmitResult cancel(const std::string& name);
    std::vector<RpcJobRow> list_jobs();
    std::vector<RpcQueueInfo> list_queues();
    // Streams the collected result file into dest_dir, returns the path written.
    std::string fetch_results(const std::string& name, const std::string& dest_dir);

private:
    RpcFrame call(RpcMethod method, const std::string& payload);
    RpcFrame read_response(std::uint8_t method_id, std::uint64_t request_id);

    int fd_ = -1;
    std::uint64_t next_request_id_ = 1;
};

} // namespace wlmbridge
