// kubectl-style client for the wlmbridge red-box endpoint, plus the `serve`
// verb that hosts the bridge itself. Talks to the core only through the C
// API in wlmbridge.h.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wlmbridge.h"

namespace {

constexpr const char* kDefaultSocket = "/tmp/wlmbridge.sock";

int exit_code_for(int rc) {
    if (rc == WLMB_OK) return 0;
    if (rc == WLMB_ERR_TRANSPORT || rc == WLMB_ERR_ADDRESS_IN_USE) return 2;
    return 1;
}

int report(const char* verb, int rc) {
    std::fprintf(stderr, "wlmbridge: %s: %s (%s)\n", verb, wlmb_last_error(),
                 wlmb_error_name(rc));
    return exit_code_for(rc);
}

std::string default_socket() {
    const char* env = std::getenv("WLMBRIDGE_SOCKET");
    return env && *env ? env : kDefaultSocket;
}

struct ClientHandle {
    wlmb_client* client = nullptr;
    ~ClientHandle() { wlmb_client_free(client); }
};

int connect_client(const std::string& socket_path, ClientHandle& handle, const char* verb) {
    int rc = wlmb_client_connect(socket_path.c_str(), &handle.client);
    if (rc != WLMB_OK) return report(verb, rc);
    return 0;
}

void print_table(const std::vector<std::vector<std::string>>& rows) {
    if (rows.empty()) return;
    std::vector<std::size_t> widths(rows[0].size(), 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());
    }
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            line += row[c];
            if (c + 1 < row.size()) line += std::string(widths[c] - row[c].size() + 3, ' ');
        }
        std::printf("%s\n", line.c_str());
    }
}

std::string format_walltime(int64_t seconds) {
    if (seconds < 0) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld",
                  static_cast<long long>(seconds / 3600),
                  static_cast<long long>((seconds % 3600) / 60),
                  static_cast<long long>(seconds % 60));
    return buf;
}

volatile std::sig_atomic_t g_stop_requested = 0;

void handle_signal(int) { g_stop_requested = 1; }

int cmd_apply(const std::string& socket_path, const std::string& file) {
    char* name = nullptr;
    int rc = wlmb_validate_manifest_file(file.c_str(), &name);
    if (rc != WLMB_OK) return report("apply", rc);
    wlmb_string_free(name);

    ClientHandle handle;
    if (int code = connect_client(socket_path, handle, "apply")) return code;

    char* uid = nullptr;
    char* job_name = nullptr;
    rc = wlmb_client_submit_file(handle.client, file.c_str(), &uid, &job_name);
    if (rc != WLMB_OK) return report("apply", rc);
    std::printf("torquejob/%s created (%s)\n", job_name, uid);
    wlmb_string_free(uid);
    wlmb_string_free(job_name);
    return 0;
}

int cmd_get(const std::string& socket_path) {
    ClientHandle handle;
    if (int code = connect_client(socket_path, handle, "get")) return code;

    wlmb_joblist* list = nullptr;
    int rc = wlmb_client_list_jobs(handle.client, &list);
    if (rc != WLMB_OK) return report("get", rc);

    std::vector<std::vector<std::string>> rows = {{"NAME", "AGE", "STATUS"}};
    for (int i = 0; i < wlmb_joblist_count(list); ++i) {
        rows.push_back({wlmb_joblist_name(list, i), wlmb_joblist_age(list, i),
                        wlmb_joblist_status(list, i)});
    }
    wlmb_joblist_free(list);
    print_table(rows);
    return 0;
}

int cmd_describe(const std::string& socket_path, const std::string& name) {
    ClientHandle handle;
    if (int code = connect_client(socket_path, handle, "describe")) return code;

    wlmb_jobinfo* info = nullptr;
    int rc = wlmb_client_job_info(handle.client, name.c_str(), &info);
    if (rc != WLMB_OK) return report("describe", rc);

    std::printf("Name:        %s\n", wlmb_jobinfo_name(info));
    std::printf("UID:         %s\n", wlmb_jobinfo_uid(info));
    std::printf("Queue:       %s\n", wlmb_jobinfo_queue(info));
    std::printf("Backend Id:  %s\n", wlmb_jobinfo_backend_id(info));
    std::printf("State:       %s\n", wlmb_jobinfo_state(info));
    if (wlmb_jobinfo_has_exit_code(info))
        std::printf("Exit Code:   %d\n", wlmb_jobinfo_exit_code(info));
    const char* reason = wlmb_jobinfo_failure_reason(info);
    if (*reason) std::printf("Reason:      %s\n", reason);
    std::printf("Age:         %llds\n", static_cast<long long>(wlmb_jobinfo_age_seconds(info)));
    std::printf("Transitions:\n");
    int count = wlmb_jobinfo_transition_count(info);
    int64_t first = count > 0 ? wlmb_jobinfo_transition_at_ms(info, 0) : 0;
    for (int i = 0; i < count; ++i) {
        std::printf("  +%-6lld %s\n",
                    static_cast<long long>((wlmb_jobinfo_transition_at_ms(info, i) - first) / 1000),
                    wlmb_jobinfo_transition_state(info, i));
    }
    wlmb_jobinfo_free(info);
    return 0;
}

int cmd_cancel(const std::string& socket_path, const std::string& name) {
    ClientHandle handle;
    if (int code = connect_client(socket_path, handle, "cancel")) return code;

    char* state = nullptr;
    int rc = wlmb_client_cancel(handle.client, name.c_str(), &state);
    if (rc != WLMB_OK) return report("cancel", rc);
    std::printf("torquejob/%s %s\n", name.c_str(), state);
    wlmb_string_free(state);
    return 0;
}

int cmd_results(const std::string& socket_path, const std::string& name,
                const std::string& dest_dir) {
    ClientHandle handle;
    if (int code = connect_client(socket_path, handle, "results")) return code;

    char* path = nullptr;
    int rc = wlmb_client_fetch_results(handle.client, name.c_str(), dest_dir.c_str(), &path);
    if (rc != WLMB_OK) return report("results", rc);
    std::printf("%s\n", path);
    wlmb_string_free(path);
    return 0;
}

int cmd_queues(const std::string& socket_path) {
    ClientHandle handle;
    if (int code = connect_client(socket_path, handle, "queues")) return code;

    wlmb_queuelist* list = nullptr;
    int rc = wlmb_client_list_queues(handle.client, &list);
    if (rc != WLMB_OK) return report("queues", rc);

    std::vector<std::vector<std::string>> rows = {
        {"NAME", "NODES", "MAX_WALLTIME", "PENDING", "RUNNING"}};
    for (int i = 0; i < wlmb_queuelist_count(list); ++i) {
        rows.push_back({wlmb_queuelist_name(list, i),
                        std::to_string(wlmb_queuelist_max_nodes(list, i)),
                        format_walltime(wlmb_queuelist_max_walltime(list, i)),
                        std::to_string(wlmb_queuelist_pending(list, i)),
                        std::to_string(wlmb_queuelist_running(list, i))});
    }
    wlmb_queuelist_free(list);
    print_table(rows);
    return 0;
}

int cmd_serve(const std::string& socket_path, const std::string& sim_config, bool pbs,
              const std::string& home, int auto_ms) {
    wlmb_bridge* bridge = nullptr;
    int rc;
    if (pbs) {
        rc = wlmb_bridge_new_pbs(home.empty() ? nullptr : home.c_str(), &bridge);
    } else {
        rc = wlmb_bridge_new_sim(sim_config.c_str(), &bridge);
    }
    if (rc != WLMB_OK) return report("serve", rc);

    rc = wlmb_bridge_serve(bridge, socket_path.c_str());
    if (rc != WLMB_OK) {
        wlmb_bridge_free(bridge);
        return report("serve", rc);
    }
    if (auto_ms > 0) wlmb_bridge_start_auto(bridge, auto_ms);

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    std::printf("serving %s backend on %s\n", pbs ? "pbs" : "sim", socket_path.c_str());
    std::fflush(stdout);
    while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));

    wlmb_bridge_stop(bridge);
    wlmb_bridge_free(bridge);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bridge between TorqueJob manifests and PBS batch queues"};
    app.require_subcommand(1);

    std::string socket_path = default_socket();
    app.add_option("--socket", socket_path, "red-box socket path")->envname("WLMBRIDGE_SOCKET");

    auto* apply = app.add_subcommand("apply", "submit a TorqueJob manifest");
    std::string apply_file;
    apply->add_option("-f,--filename", apply_file, "manifest file")->required();

    auto* get = app.add_subcommand("get", "list jobs");

    auto* describe = app.add_subcommand("describe", "show one job in detail");
    std::string describe_name;
    describe->add_option("name", describe_name, "job name or uid")->required();

    auto* cancel = app.add_subcommand("cancel", "cancel a job");
    std::string cancel_name;
    cancel->add_option("name", cancel_name, "job name or uid")->required();

    auto* results = app.add_subcommand("results", "fetch a job's collected results");
    std::string results_name;
    std::string results_dir = ".";
    results->add_option("name", results_name, "job name or uid")->required();
    results->add_option("-o,--output-dir", results_dir, "directory to write into");

    auto* queues = app.add_subcommand("queues", "list backend queues");

    auto* serve = app.add_subcommand("serve", "run the bridge service");
    std::string sim_config;
    std::string serve_home;
    bool use_pbs = false;
    int auto_ms = 1000;
    auto* sim_opt = serve->add_option("--sim-config", sim_config, "simulated cluster config");
    serve->add_flag("--pbs", use_pbs, "drive a real PBS installation");
    serve->add_option("--home", serve_home, "results $HOME expansion root (pbs backend)");
    serve->add_option("--auto-ms", auto_ms, "progress interval in ms, 0 disables");
    sim_opt->excludes("--pbs");

    CLI11_PARSE(app, argc, argv);

    if (*apply) return cmd_apply(socket_path, apply_file);
    if (*get) return cmd_get(socket_path);
    if (*describe) return cmd_describe(socket_path, describe_name);
    if (*cancel) return cmd_cancel(socket_path, cancel_name);
    if (*results) return cmd_results(socket_path, results_name, results_dir);
    if (*queues) return cmd_queues(socket_path);
    if (*serve) {
        if (!use_pbs && sim_config.empty()) {
            std::fprintf(stderr, "wlmbridge: serve: --sim-config FILE or --pbs is required\n");
            return 1;
        }
        return cmd_serve(socket_path, sim_config, use_pbs, serve_home, auto_ms);
    }
    return 1;
}
