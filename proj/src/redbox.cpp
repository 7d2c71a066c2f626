#include "redbox.hpp"

#include <sys/socket.h>

#include <yaml-cpp/yaml.h>

#include <cerrno>
#include <cstring>

namespace wlmbridge {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<char>((v >> shift) & 0xff));
}

std::uint32_t get_u32(std::string_view data) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<std::uint8_t>(data[i]);
    return v;
}

std::uint64_t get_u64(std::string_view data) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | static_cast<std::uint8_t>(data[i]);
    return v;
}

YAML::Node load_payload(const std::string& payload) {
    try {
        return YAML::Load(payload);
    } catch (const YAML::Exception& e) {
        fail(Err::malformed_frame, std::string("payload is not valid YAML: ") + e.what());
    }
}

std::string emit(const YAML::Emitter& out) { return std::string(out.c_str()) + "\n"; }

} // namespace

std::string encode_frame(const RpcFrame& frame) {
    std::uint64_t body_len = kFrameHeaderSize + frame.payload.size();
    if (body_len > kMaxFrameBody)
        fail(Err::oversized_frame, "frame body of " + std::to_string(body_len) + " bytes exceeds cap");
    std::string out;
    out.reserve(4 + body_len);
    put_u32(out, static_cast<std::uint32_t>(body_len));
    out.push_back(static_cast<char>(frame.method_id));
    put_u64(out, frame.request_id);
    out += frame.payload;
    return out;
}

RpcFrame decode_frame(std::string_view data) {
    if (data.size() < 4) fail(Err::malformed_frame, "frame shorter than its length prefix");
    std::uint32_t body_len = get_u32(data);
    if (body_len > kMaxFrameBody)
        fail(Err::oversized_frame, "declared body of " + std::to_string(body_len) + " bytes exceeds cap");
    if (body_len < kFrameHeaderSize)
        fail(Err::malformed_frame, "declared body too short for method and request id");
    if (data.size() != 4u + body_len)
        fail(Err::malformed_frame, "declared length " + std::to_string(body_len) +
                                       " does not match body of " + std::to_string(data.size() - 4));
    RpcFrame frame;
    frame.method_id = static_cast<std::uint8_t>(data[4]);
    frame.request_id = get_u64(data.substr(5));
    std::uint8_t method = frame.method_id & ~kResponseBit;
    if (method < 1 || method > 6) fail(Err::malformed_frame, "unknown method id");
    frame.payload.assign(data.substr(4 + kFrameHeaderSize));
    return frame;
}

std::string encode_name_request(const std::string& name) {
    YAML::Emitter out;
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << name << YAML::EndMap;
    return emit(out);
}

std::string decode_name_request(const std::string& payload) {
    YAML::Node node = load_payload(payload);
    if (!node.IsMap() || !node["name"]) fail(Err::malformed_frame, "request has no name");
    return node["name"].as<std::string>();
}

std::string encode_submit_request(const std::string& manifest_text) {
    YAML::Emitter out;
    out << YAML::BeginMap << YAML::Key << "manifest" << YAML::Value << YAML::Literal
        << manifest_text << YAML::EndMap;
    return emit(out);
}

std::string decode_submit_request(const std::string& payload) {
    YAML::Node node = load_payload(payload);
    if (!node.IsMap() || !node["manifest"]) fail(Err::malformed_frame, "request has no manifest");
    return node["manifest"].as<std::string>();
}

std::string encode_submit_result(const RpcSubmitResult& r) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << r.name;
    out << YAML::Key << "state" << YAML::Value << r.state;
    out << YAML::Key << "uid" << YAML::Value << r.uid;
    out << YAML::EndMap;
    return emit(out);
}

RpcSubmitResult decode_submit_result(const std::string& payload) {
    YAML::Node node = load_payload(payload);
    RpcSubmitResult r;
    r.name = node["name"].as<std::string>("");
    r.state = node["state"].as<std::string>("");
    r.uid = node["uid"].as<std::string>("");
    return r;
}

std::string encode_job_info(const RpcJobInfo& info) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "age_seconds" << YAML::Value << info.age_seconds;
    out << YAML::Key << "backend_id" << YAML::Value << info.backend_id;
    if (info.exit_code) out << YAML::Key << "exit_code" << YAML::Value << *info.exit_code;
    out << YAML::Key << "failure_reason" << YAML::Value << info.failure_reason;
    out << YAML::Key << "name" << YAML::Value << info.name;
    out << YAML::Key << "queue" << YAML::Value << info.queue;
    out << YAML::Key << "state" << YAML::Value << info.state;
    out << YAML::Key << "transitions" << YAML::Value << YAML::BeginSeq;
    for (const RpcTransition& t : info.transitions) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "at_ms" << YAML::Value << t.at_ms;
        out << YAML::Key << "state" << YAML::Value << t.state;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "uid" << YAML::Value << info.uid;
    out << YAML::EndMap;
    return emit(out);
}

RpcJobInfo decode_job_info(const std::string& payload) {
    YAML::Node node = load_payload(payload);
    RpcJobInfo info;
    info.age_seconds = node["age_seconds"].as<std::int64_t>(0);
    info.backend_id = node["backend_id"].as<std::string>("");
    if (node["exit_code"]) info.exit_code = node["exit_code"].as<int>();
    info.failure_reason = node["failure_reason"].as<std::string>("");
    info.name = node["name"].as<std::string>("");
    info.queue = node["queue"].as<std::string>("");
    info.state = node["state"].as<std::string>("");
    for (const YAML::Node& t : node["transitions"]) {
        info.transitions.push_back({t["at_ms"].as<std::int64_t>(0), t["state"].as<std::string>("")});
    }
    info.uid = node["uid"].as<std::string>("");
    return info;
}

std::string encode_job_rows(const std::vector<RpcJobRow>& rows) {
    YAML::Emitter out;
    out << YAML::BeginMap << YAML::Key << "jobs" << YAML::Value << YAML::BeginSeq;
    for (const RpcJobRow& row : rows) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "age" << YAML::Value << row.age;
        out << YAML::Key << "name" << YAML::Value << row.name;
        out << YAML::Key << "status" << YAML::Value << row.status;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
    return emit(out);
}

std::vector<RpcJobRow> decode_job_rows(const std::string& payload) {
    YAML::Node node = load_payload(payload);
    std::vector<RpcJobRow> rows;
    for (const YAML::Node& r : node["jobs"]) {
        rows.push_back({r["age"].as<std::string>(""), r["name"].as<std::string>(""),
                        r["status"].as<std::string>("")});
    }
    return rows;
}

std::string encode_queue_infos(const std::vector<RpcQueueInfo>& queues) {
    YAML::Emitter out;
    out << YAML::BeginMap << YAML::Key << "queues" << YAML::Value << YAML::BeginSeq;
    for (const RpcQueueInfo& q : queues) {
        out << YAML::BeginMap;
        out << YAML::Key << "jobs_pending" << YAML::Value << q.jobs_pending;
        out << YAML::Key << "jobs_running" << YAML::Value << q.jobs_running;
        out << YAML::Key << "max_nodes" << YAML::Value << q.max_nodes;
        if (q.max_walltime_seconds)
            out << YAML::Key << "max_walltime" << YAML::Value << *q.max_walltime_seconds;
        out << YAML::Key << "name" << YAML::Value << q.name;
        out << YAML::Key << "nodes" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const std::string& n : q.nodes) out << n;
        out << YAML::EndSeq;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
    return emit(out);
}

std::vector<RpcQueueInfo> decode_queue_infos(const std::string& payload) {
    YAML::Node node = load_payload(payload);
    std::vector<RpcQueueInfo> queues;
    for (const YAML::Node& q : node["queues"]) {
        RpcQueueInfo info;
        info.jobs_pending = q["jobs_pending"].as<int>(0);
        info.jobs_running = q["jobs_running"].as<int>(0);
        info.max_nodes = q["max_nodes"].as<int>(0);
        if (q["max_walltime"]) info.max_walltime_seconds = q["max_walltime"].as<std::int64_t>();
        info.name = q["name"].as<std::string>("");
        for (const YAML::Node& n : q["nodes"]) info.nodes.push_back(n.as<std::string>());
        queues.push_back(std::move(info));
    }
    return queues;
}

std::string encode_result_chunk(const RpcResultChunk& chunk) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "data" << YAML::Value
        << YAML::Binary(reinterpret_cast<const unsigned char*>(chunk.data.data()),
                        chunk.data.size());
    out << YAML::Key << "eof" << YAML::Value << chunk.eof;
    out << YAML::Key << "filename" << YAML::Value << chunk.filename;
    out << YAML::EndMap;
    return emit(out);
}

RpcResultChunk decode_result_chunk(const std::string& payload) {
    YAML::Node node = load_payload(payload);
    RpcResultChunk chunk;
    if (node["data"]) {
        YAML::Binary bin = node["data"].as<YAML::Binary>();
        chunk.data.assign(reinterpret_cast<const char*>(bin.data()), bin.size());
    }
    chunk.eof = node["eof"].as<bool>(false);
    chunk.filename = node["filename"].as<std::string>("");
    return chunk;
}

std::string encode_error(Err code, const std::string& message) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "error" << YAML::Value << err_name(code);
    out << YAML::Key << "message" << YAML::Value << message;
    out << YAML::EndMap;
    return emit(out);
}

bool decode_error(const std::string& payload, Err& code, std::string& message) {
    YAML::Node node;
    try {
        node = YAML::Load(payload);
    } catch (const YAML::Exception&) {
        return false;
    }
    if (!node.IsMap() || !node["error"]) return false;
    code = err_from_name(node["error"].as<std::string>(""));
    message = node["message"].as<std::string>("");
    return true;
}

Err err_from_name(const std::string& name) {
    for (int i = 0; i <= static_cast<int>(Err::internal); ++i) {
        Err e = static_cast<Err>(i);
        if (name == err_name(e)) return e;
    }
    return Err::internal;
}

void write_frame_fd(int fd, const RpcFrame& frame) {
    std::string bytes = encode_frame(frame);
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail(Err::transport, std::string("send failed: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(n);
    }
}

namespace {

void read_exact(int fd, char* buf, std::size_t len) {
    std::size_t got = 0;
    while (got < len) {
        ssize_t n = ::recv(fd, buf + got, len - got, 0);
        if (n == 0) fail(Err::transport, "connection closed");
        if (n < 0) {
            if (errno == EINTR) continue;
            fail(Err::transport, std::string("recv failed: ") + std::strerror(errno));
        }
        got += static_cast<std::size_t>(n);
    }
}

} // namespace

RpcFrame read_frame_fd(int fd) {
    char header[4];
    read_exact(fd, header, 4);
    std::string buf(header, 4);
    std::uint32_t body_len = get_u32(buf);
    if (body_len > kMaxFrameBody)
        fail(Err::oversized_frame, "peer declared a body beyond the 16 MiB cap");
    if (body_len < kFrameHeaderSize) fail(Err::malformed_frame, "peer declared a truncated body");
    buf.resize(4 + body_len);
    read_exact(fd, buf.data() + 4, body_len);
    return decode_frame(buf);
}

} // namespace wlmbridge
