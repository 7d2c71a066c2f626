#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "lifecycle.hpp"
#include "registry.hpp"

namespace wlmbridge {

// Wire format: 4-byte big-endian body length, then body =
// method_id (1 byte) + request_id (8 bytes big-endian) + payload.
// Responses echo the request's method_id with the high bit set.
enum class RpcMethod : std::uint8_t {
    SubmitJob = 1,
    JobStatus = 2,
    CancelJob = 3,
    ListJobs = 4,
    FetchResults = 5,
    ListQueues = 6,
};

constexpr std::uint8_t kResponseBit = 0x80;
constexpr std::uint32_t kMaxFrameBody = 16u * 1024 * 1024;
constexpr std::size_t kFrameHeaderSize = 9; // method + request id
constexpr std::size_t kResultChunkSize = 64u * 1024;

struct RpcFrame {
    std::uint8_t method_id = 0;
    std::uint64_t request_id = 0;
    std::string payload;

    bool operator==(const RpcFrame&) const = default;
};

std::string encode_frame(const RpcFrame& frame); // throws OversizedFrame

// Decodes exactly one frame occupying the whole buffer. Truncated, trailing
// or length-inconsistent input is MalformedFrame; a declared body beyond
// the 16 MiB cap is OversizedFrame.
RpcFrame decode_frame(std::string_view data);

// --- payload schemas (canonical key-ordered YAML inside the frame) -------

struct RpcSubmitResult {
    std::string name;
    std::string state;
    std::string uid;
};

struct RpcTransition {
    std::int64_t at_ms = 0;
    std::string state;
};

struct RpcJobInfo {
    std::int64_t age_seconds = 0;
    std::string backend_id;
    std::optional<int> exit_code;
    std::string failure_reason;
    std::string name;
    std::string queue;
    std::string state;
    std::vector<RpcTransition> transitions;
    std::string uid;
};

struct RpcJobRow {
    std::string age;
    std::string name;
    std::string status;
};

struct RpcQueueInfo {
    int jobs_pending = 0;
    int jobs_running = 0;
    int max_nodes = 0;
    std::optional<std::int64_t> max_walltime_seconds;
    std::string name;
    std::vector<std::string> nodes;
};

struct RpcResultChunk {
    std::string data;
    bool eof = false;
    std::string filename;
};

std::string encode_name_request(const std::string& name);
std::string decode_name_request(const std::string& payload);

std::string encode_submit_request(const std::string& manifest_text);
std::string decode_submit_request(const std::string& payload);

std::string encode_submit_result(const RpcSubmitResult& r);
RpcSubmitResult decode_submit_result(const std::string& payload);

std::string encode_job_info(const RpcJobInfo& info);
RpcJobInfo decode_job_info(const std::string& payload);

std::string encode_job_rows(const std::vector<RpcJobRow>& rows);
std::vector<RpcJobRow> decode_job_rows(const std::string& payload);

std::string encode_queue_infos(const std::vector<RpcQueueInfo>& queues);
std::vector<RpcQueueInfo> decode_queue_infos(const std::string& payload);

std::string encode_result_chunk(const RpcResultChunk& chunk);
RpcResultChunk decode_result_chunk(const std::string& payload);

std::string encode_error(Err code, const std::string& message);
// Returns true when the payload is an error payload; fills code and message.
bool decode_error(const std::string& payload, Err& code, std::string& message);

Err err_from_name(const std::string& name);

// Socket helpers shared by server and client. Both throw TransportError on
// EOF or I/O failure and the framing errors on invalid wire data.
void write_frame_fd(int fd, const RpcFrame& frame);
RpcFrame read_frame_fd(int fd);

} // namespace wlmbridge
