#include "redbox_client.hpp"

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace wlmbridge {

RedboxClient::RedboxClient(const std::string& socket_path) {
    fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd_ < 0) fail(Err::transport, std::string("socket: ") + std::strerror(errno));
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (socket_path.size() >= sizeof(addr.sun_path)) {
        ::close(fd_);
        fd_ = -1;
        fail(Err::invalid_arg, "socket path too long: " + socket_path);
    }
    std::strncpy(addr.sun_path, socket_path.c_str(), sizeof(addr.sun_path) - 1);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        int saved = errno;
        ::close(fd_);
        fd_ = -1;
        fail(Err::transport,
             "cannot connect to " + socket_path + ": " + std::strerror(saved));
    }
}

RedboxClient::~RedboxClient() {
    if (fd_ >= 0) ::close(fd_);
}

RpcFrame RedboxClient::read_response(std::uint8_t method_id, std::uint64_t request_id) {
    RpcFrame resp = read_frame_fd(fd_);
    if (resp.method_id != (method_id | kResponseBit))
        fail(Err::transport, "response method does not match request");
    if (resp.request_id != request_id)
        fail(Err::transport, "response request id does not match request");
    Err code;
    std::string message;
    if (decode_error(resp.payload, code, message)) throw WlmError(code, message);
    return resp;
}

RpcFrame RedboxClient::call(RpcMethod method, const std::string& payload) {
    RpcFrame request;
    request.method_id = static_cast<std::uint8_t>(method);
    request.request_id = next_request_id_++;
    request.payload = payload;
    write_frame_fd(fd_, request);
    return read_response(request.method_id, request.request_id);
}

RpcSubmitResult RedboxClient::submit(const std::string& manifest_text) {
    return decode_submit_result(call(RpcMethod::SubmitJob, encode_submit_request(manifest_text)).payload);
}

RpcJobInfo RedboxClient::job_status(const std::string& name) {
    return decode_job_info(call(RpcMethod::JobStatus, encode_name_request(name)).payload);
}

RpcSubmitResult RedboxClient::cancel(const std::string& name) {
    return decode_submit_result(call(RpcMethod::CancelJob, encode_name_request(name)).payload);
}

std::vector<RpcJobRow> RedboxClient::list_jobs() {
    return decode_job_rows(call(RpcMethod::ListJobs, "{}\n").payload);
}

std::vector<RpcQueueInfo> RedboxClient::list_queues() {
    return decode_queue_infos(call(RpcMethod::ListQueues, "{}\n").payload);
}

std::string RedboxClient::fetch_results(const std::string& name, const std::string& dest_dir) {
    RpcFrame request;
    request.method_id = static_cast<std::uint8_t>(RpcMethod::FetchResults);
    request.request_id = next_request_id_++;
    request.payload = encode_name_request(name);
    write_frame_fd(fd_, request);

    std::string dest_path;
    std::ofstream out;
    for (;;) {
        RpcFrame resp = read_response(request.method_id, request.request_id);
        RpcResultChunk chunk = decode_result_chunk(resp.payload);
        if (dest_path.empty()) {
            if (chunk.filename.empty()) fail(Err::transport, "result stream carries no filename");
            dest_path = (std::filesystem::path(dest_dir) / chunk.filename).string();
            out.open(dest_path, std::ios::binary | std::ios::trunc);
            if (!out) fail(Err::destination_unwritable, "cannot write " + dest_path);
        }
        out.write(chunk.data.data(), static_cast<std::streamsize>(chunk.data.size()));
        if (chunk.eof) break;
    }
    out.close();
    if (!out) fail(Err::destination_unwritable, "short write to " + dest_path);
    return dest_path;
}

} // namespace wlmbridge
