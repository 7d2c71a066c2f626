#include "wlmbridge.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bridge.hpp"
#include "redbox_client.hpp"

using namespace wlmbridge;

static_assert(static_cast<int>(Err::invalid_arg) == WLMB_ERR_INVALID_ARG);
static_assert(static_cast<int>(Err::malformed_manifest) == WLMB_ERR_MALFORMED_MANIFEST);
static_assert(static_cast<int>(Err::unsupported_kind) == WLMB_ERR_UNSUPPORTED_KIND);
static_assert(static_cast<int>(Err::missing_field) == WLMB_ERR_MISSING_FIELD);
static_assert(static_cast<int>(Err::malformed_walltime) == WLMB_ERR_MALFORMED_WALLTIME);
static_assert(static_cast<int>(Err::malformed_directive) == WLMB_ERR_MALFORMED_DIRECTIVE);
static_assert(static_cast<int>(Err::unknown_variable) == WLMB_ERR_UNKNOWN_VARIABLE);
static_assert(static_cast<int>(Err::duplicate_queue) == WLMB_ERR_DUPLICATE_QUEUE);
static_assert(static_cast<int>(Err::no_such_queue) == WLMB_ERR_NO_SUCH_QUEUE);
static_assert(static_cast<int>(Err::no_feasible_queue) == WLMB_ERR_NO_FEASIBLE_QUEUE);
static_assert(static_cast<int>(Err::backend_unavailable) == WLMB_ERR_BACKEND_UNAVAILABLE);
static_assert(static_cast<int>(Err::no_such_job) == WLMB_ERR_NO_SUCH_JOB);
static_assert(static_cast<int>(Err::illegal_transition) == WLMB_ERR_ILLEGAL_TRANSITION);
static_assert(static_cast<int>(Err::job_exceeds_queue) == WLMB_ERR_JOB_EXCEEDS_QUEUE);
static_assert(static_cast<int>(Err::malformed_config) == WLMB_ERR_MALFORMED_CONFIG);
static_assert(static_cast<int>(Err::malformed_frame) == WLMB_ERR_MALFORMED_FRAME);
static_assert(static_cast<int>(Err::oversized_frame) == WLMB_ERR_OVERSIZED_FRAME);
static_assert(static_cast<int>(Err::source_missing) == WLMB_ERR_SOURCE_MISSING);
static_assert(static_cast<int>(Err::destination_unwritable) == WLMB_ERR_DESTINATION_UNWRITABLE);
static_assert(static_cast<int>(Err::results_unavailable) == WLMB_ERR_RESULTS_UNAVAILABLE);
static_assert(static_cast<int>(Err::transport) == WLMB_ERR_TRANSPORT);
static_assert(static_cast<int>(Err::address_in_use) == WLMB_ERR_ADDRESS_IN_USE);
static_assert(static_cast<int>(Err::io) == WLMB_ERR_IO);
static_assert(static_cast<int>(Err::internal) == WLMB_ERR_INTERNAL);

struct wlmb_bridge {
    std::unique_ptr<Bridge> impl;
};

struct wlmb_client {
    std::unique_ptr<RedboxClient> impl;
};

struct wlmb_joblist {
    std::vector<RpcJobRow> rows;
};

struct wlmb_jobinfo {
    RpcJobInfo info;
};

struct wlmb_queuelist {
    std::vector<RpcQueueInfo> queues;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
int guarded(Fn&& fn) {
    g_last_error.clear();
    try {
        fn();
        return WLMB_OK;
    } catch (const WlmError& e) {
        g_last_error = e.what();
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return WLMB_ERR_INTERNAL;
    }
}

int require(bool cond, const char* message) {
    if (cond) return WLMB_OK;
    g_last_error = message;
    return WLMB_ERR_INVALID_ARG;
}

std::string read_text_file(const char* path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Err::io, std::string("cannot open ") + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

extern "C" {

const char* wlmb_error_name(int code) {
    return err_name(static_cast<Err>(code));
}

const char* wlmb_last_error(void) { return g_last_error.c_str(); }

void wlmb_string_free(char* s) { std::free(s); }

/* ---- bridge ------------------------------------------------------------ */

int wlmb_bridge_new_sim(const char* config_path, wlmb_bridge** out) {
    int rc = require(config_path && out, "config_path and out must be non-null");
    if (rc) return rc;
    return guarded([&] {
        auto handle = std::make_unique<wlmb_bridge>();
        handle->impl = Bridge::with_sim_backend_file(config_path);
        *out = handle.release();
    });
}

int wlmb_bridge_new_sim_text(const char* config_yaml, wlmb_bridge** out) {
    int rc = require(config_yaml && out, "config_yaml and out must be non-null");
    if (rc) return rc;
    return guarded([&] {
        auto handle = std::make_unique<wlmb_bridge>();
        handle->impl = Bridge::with_sim_backend(parse_cluster_config(config_yaml));
        *out = handle.release();
    });
}

int wlmb_bridge_new_pbs(const char* home, wlmb_bridge** out) {
    int rc = require(out != nullptr, "out must be non-null");
    if (rc) return rc;
    return guarded([&] {
        auto handle = std::make_unique<wlmb_bridge>();
        handle->impl = Bridge::with_pbs_backend(home ? home : "");
        *out = handle.release();
    });
}

void wlmb_bridge_free(wlmb_bridge* bridge) { delete bridge; }

int wlmb_bridge_serve(wlmb_bridge* bridge, const char* socket_path) {
    int rc = require(bridge && socket_path, "bridge and socket_path must be non-null");
    if (rc) return rc;
    return guarded([&] { bridge->impl->serve(socket_path); });
}

int wlmb_bridge_start_auto(wlmb_bridge* bridge, int interval_ms) {
    int rc = require(bridge != nullptr, "bridge must be non-null");
    if (rc) return rc;
    return guarded([&] { bridge->impl->start_auto(interval_ms); });
}

int wlmb_bridge_stop(wlmb_bridge* bridge) {
    int rc = require(bridge != nullptr, "bridge must be non-null");
    if (rc) return rc;
    return guarded([&] { bridge->impl->stop(); });
}

int wlmb_bridge_tick(wlmb_bridge* bridge, int n) {
    int rc = require(bridge != nullptr, "bridge must be non-null");
    if (rc) return rc;
    return guarded([&] { bridge->impl->tick(n); });
}

int wlmb_bridge_reconcile(wlmb_bridge* bridge) {
    int rc = require(bridge != nullptr, "bridge must be non-null");
    if (rc) return rc;
    return guarded([&] { bridge->impl->reconcile(); });
}

int wlmb_bridge_set_sim_output(wlmb_bridge* bridge, const char* text) {
    int rc = require(bridge && text, "bridge and text must be non-null");
    if (rc) return rc;
    return guarded([&] {
        SimCluster* sim = bridge->impl->sim();
        if (!sim) fail(Err::invalid_arg, "bridge is not sim-backed");
        sim->set_output_fixture(text);
    });
}

const char* wlmb_bridge_home(const wlmb_bridge* bridge) {
    return bridge ? bridge->impl->home().c_str() : "";
}

/* ---- client ------------------------------------------------------------ */

int wlmb_client_connect(const char* socket_path, wlmb_client** out) {
    int rc = require(socket_path && out, "socket_path and out must be non-null");
    if (rc) return rc;
    return guarded([&] {
        auto handle = std::make_unique<wlmb_client>();
        handle->impl = std::make_unique<RedboxClient>(socket_path);
        *out = handle.release();
    });
}

void wlmb_client_free(wlmb_client* client) { delete client; }

int wlmb_client_submit_text(wlmb_client* client, const char* manifest_yaml, char** uid_out,
                            char** name_out) {
    int rc = require(client && manifest_yaml, "client and manifest_yaml must be non-null");
    if (rc) return rc;
    return guarded([&] {
        RpcSubmitResult result = client->impl->submit(manifest_yaml);
        if (uid_out) *uid_out = dup_string(result.uid);
        if (name_out) *name_out = dup_string(result.name);
    });
}

int wlmb_client_submit_file(wlmb_client* client, const char* manifest_path, char** uid_out,
                            char** name_out) {
    int rc = require(client && manifest_path, "client and manifest_path must be non-null");
    if (rc) return rc;
    return guarded([&] {
        RpcSubmitResult result = client->impl->submit(read_text_file(manifest_path));
        if (uid_out) *uid_out = dup_string(result.uid);
        if (name_out) *name_out = dup_string(result.name);
    });
}

int wlmb_client_list_jobs(wlmb_client* client, wlmb_joblist** out) {
    int rc = require(client && out, "client and out must be non-null");
    if (rc) return rc;
    return guarded([&] {
        auto list = std::make_unique<wlmb_joblist>();
        list->rows = client->impl->list_jobs();
        *out = list.release();
    });
}

int wlmb_client_job_info(wlmb_client* client, const char* name, wlmb_jobinfo** out) {
    int rc = require(client && name && out, "client, name and out must be non-null");
    if (rc) return rc;
    return guarded([&] {
        auto info = std::make_unique<wlmb_jobinfo>();
        info->info = client->impl->job_status(name);
        *out = info.release();
    });
}

int wlmb_client_cancel(wlmb_client* client, const char* name, char** state_out) {
    int rc = require(client && name, "client and name must be non-null");
    if (rc) return rc;
    return guarded([&] {
        RpcSubmitResult result = client->impl->cancel(name);
        if (state_out) *state_out = dup_string(result.state);
    });
}

int wlmb_client_fetch_results(wlmb_client* client, const char* name, const char* dest_dir,
                              char** path_out) {
    int rc = require(client && name && dest_dir, "client, name and dest_dir must be non-null");
    if (rc) return rc;
    return guarded([&] {
        std::string path = client->impl->fetch_results(name, dest_dir);
        if (path_out) *path_out = dup_string(path);
    });
}

int wlmb_client_list_queues(wlmb_client* client, wlmb_queuelist** out) {
    int rc = require(client && out, "client and out must be non-null");
    if (rc) return rc;
    return guarded([&] {
        auto list = std::make_unique<wlmb_queuelist>();
        list->queues = client->impl->list_queues();
        *out = list.release();
    });
}

int wlmb_validate_manifest_file(const char* manifest_path, char** name_out) {
    int rc = require(manifest_path != nullptr, "manifest_path must be non-null");
    if (rc) return rc;
    return guarded([&] {
        JobManifest manifest = parse_manifest(read_text_file(manifest_path));
        if (name_out) *name_out = dup_string(manifest.name);
    });
}

/* ---- joblist ------------------------------------------------------------ */

int wlmb_joblist_count(const wlmb_joblist* list) {
    return list ? static_cast<int>(list->rows.size()) : 0;
}

const char* wlmb_joblist_name(const wlmb_joblist* list, int i) {
    if (!list || i < 0 || i >= static_cast<int>(list->rows.size())) return "";
    return list->rows[static_cast<std::size_t>(i)].name.c_str();
}

const char* wlmb_joblist_age(const wlmb_joblist* list, int i) {
    if (!list || i < 0 || i >= static_cast<int>(list->rows.size())) return "";
    return list->rows[static_cast<std::size_t>(i)].age.c_str();
}

const char* wlmb_joblist_status(const wlmb_joblist* list, int i) {
    if (!list || i < 0 || i >= static_cast<int>(list->rows.size())) return "";
    return list->rows[static_cast<std::size_t>(i)].status.c_str();
}

void wlmb_joblist_free(wlmb_joblist* list) { delete list; }

/* ---- jobinfo ------------------------------------------------------------ */

const char* wlmb_jobinfo_uid(const wlmb_jobinfo* info) {
    return info ? info->info.uid.c_str() : "";
}

const char* wlmb_jobinfo_name(const wlmb_jobinfo* info) {
    return info ? info->info.name.c_str() : "";
}

const char* wlmb_jobinfo_state(const wlmb_jobinfo* info) {
    return info ? info->info.state.c_str() : "";
}

const char* wlmb_jobinfo_queue(const wlmb_jobinfo* info) {
    return info ? info->info.queue.c_str() : "";
}

const char* wlmb_jobinfo_backend_id(const wlmb_jobinfo* info) {
    return info ? info->info.backend_id.c_str() : "";
}

const char* wlmb_jobinfo_failure_reason(const wlmb_jobinfo* info) {
    return info ? info->info.failure_reason.c_str() : "";
}

int64_t wlmb_jobinfo_age_seconds(const wlmb_jobinfo* info) {
    return info ? info->info.age_seconds : 0;
}

int wlmb_jobinfo_has_exit_code(const wlmb_jobinfo* info) {
    return info && info->info.exit_code ? 1 : 0;
}

int wlmb_jobinfo_exit_code(const wlmb_jobinfo* info) {
    return info && info->info.exit_code ? *info->info.exit_code : 0;
}

int wlmb_jobinfo_transition_count(const wlmb_jobinfo* info) {
    return info ? static_cast<int>(info->info.transitions.size()) : 0;
}

const char* wlmb_jobinfo_transition_state(const wlmb_jobinfo* info, int i) {
    if (!info || i < 0 || i >= static_cast<int>(info->info.transitions.size())) return "";
    return info->info.transitions[static_cast<std::size_t>(i)].state.c_str();
}

int64_t wlmb_jobinfo_transition_at_ms(const wlmb_jobinfo* info, int i) {
    if (!info || i < 0 || i >= static_cast<int>(info->info.transitions.size())) return 0;
    return info->info.transitions[static_cast<std::size_t>(i)].at_ms;
}

void wlmb_jobinfo_free(wlmb_jobinfo* info) { delete info; }

/* ---- queuelist ----------------------------------------------------------- */

int wlmb_queuelist_count(const wlmb_queuelist* list) {
    return list ? static_cast<int>(list->queues.size()) : 0;
}

static const RpcQueueInfo* queue_at(const wlmb_queuelist* list, int i) {
    if (!list || i < 0 || i >= static_cast<int>(list->queues.size())) return nullptr;
    return &list->queues[static_cast<std::size_t>(i)];
}

const char* wlmb_queuelist_name(const wlmb_queuelist* list, int i) {
    const RpcQueueInfo* q = queue_at(list, i);
    return q ? q->name.c_str() : "";
}

int wlmb_queuelist_max_nodes(const wlmb_queuelist* list, int i) {
    const RpcQueueInfo* q = queue_at(list, i);
    return q ? q->max_nodes : 0;
}

int64_t wlmb_queuelist_max_walltime(const wlmb_queuelist* list, int i) {
    const RpcQueueInfo* q = queue_at(list, i);
    return q && q->max_walltime_seconds ? *q->max_walltime_seconds : -1;
}

int wlmb_queuelist_node_count(const wlmb_queuelist* list, int i) {
    const RpcQueueInfo* q = queue_at(list, i);
    return q ? static_cast<int>(q->nodes.size()) : 0;
}

const char* wlmb_queuelist_node(const wlmb_queuelist* list, int i, int j) {
    const RpcQueueInfo* q = queue_at(list, i);
    if (!q || j < 0 || j >= static_cast<int>(q->nodes.size())) return "";
    return q->nodes[static_cast<std::size_t>(j)].c_str();
}

int wlmb_queuelist_pending(const wlmb_queuelist* list, int i) {
    const RpcQueueInfo* q = queue_at(list, i);
    return q ? q->jobs_pending : 0;
}

int wlmb_queuelist_running(const wlmb_queuelist* list, int i) {
    const RpcQueueInfo* q = queue_at(list, i);
    return q ? q->jobs_running : 0;
}

void wlmb_queuelist_free(wlmb_queuelist* list) { delete list; }

} // extern "C"
