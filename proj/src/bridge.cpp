#include "bridge.hpp"

#include <cstdlib>

namespace wlmbridge {

std::unique_ptr<Bridge> Bridge::with_sim_backend(SimClusterConfig config) {
    auto bridge = std::unique_ptr<Bridge>(new Bridge());
    auto sim = std::make_unique<SimCluster>(std::move(config));
    bridge->sim_ = sim.get();
    bridge->adapter_ = std::move(sim);
    auto clock = std::make_unique<ManualClock>();
    bridge->manual_clock_ = clock.get();
    bridge->clock_ = std::move(clock);
    bridge->registry_.refresh(discover_queues(*bridge->adapter_), 0);
    bridge->store_ = std::make_unique<JobStore>(*bridge->adapter_, bridge->registry_,
                                                *bridge->clock_, bridge->sim_->home());
    return bridge;
}

std::unique_ptr<Bridge> Bridge::with_sim_backend_file(const std::string& config_path) {
    return with_sim_backend(load_cluster_config(config_path));
}

std::unique_ptr<Bridge> Bridge::with_pbs_backend(std::string home) {
    auto bridge = std::unique_ptr<Bridge>(new Bridge());
    bridge->adapter_ = std::make_unique<PbsExecAdapter>();
    auto clock = std::make_unique<SystemClock>();
    bridge->clock_ = std::move(clock);
    if (home.empty()) {
        const char* env_home = std::getenv("HOME");
        home = env_home && *env_home ? env_home : "/tmp";
    }
    bridge->registry_.refresh(discover_queues(*bridge->adapter_), bridge->clock_->now_ms());
    bridge->store_ = std::make_unique<JobStore>(*bridge->adapter_, bridge->registry_,
                                                *bridge->clock_, std::move(home));
    return bridge;
}

Bridge::~Bridge() { stop(); }

void Bridge::serve(const std::string& socket_path) {
    if (server_) fail(Err::invalid_arg, "bridge is already serving");
    server_ = std::make_unique<RedboxServer>(socket_path, *store_, registry_);
    try {
        server_->start();
    } catch (...) {
        server_.reset();
        throw;
    }
}

void Bridge::stop() {
    if (!auto_stop_.exchange(true) && auto_thread_.joinable()) auto_thread_.join();
    if (server_) {
        server_->stop();
        server_.reset();
    }
}

void Bridge::tick(int n) {
    if (n < 1) fail(Err::invalid_arg, "tick count must be at least 1");
    for (int i = 0; i < n; ++i) {
        if (sim_) {
            sim_->tick(1);
            manual_clock_->advance_ms(1000);
        }
        store_->reconcile_all();
    }
}

void Bridge::reconcile() { store_->reconcile_all(); }

void Bridge::refresh_queues() {
    registry_.refresh(discover_queues(*adapter_), clock_->now_ms());
}

void Bridge::start_auto(int interval_ms) {
    if (interval_ms < 1) fail(Err::invalid_arg, "interval must be at least 1 ms");
    if (!auto_stop_.exchange(false)) return; // already running
    auto_thread_ = std::thread([this, interval_ms] {
        while (!auto_stop_) {
            std::this_thread::sleep_for(std::chrono::milliseconds(interval_ms));
            if (auto_stop_) break;
            try {
                tick(1);
            } catch (const WlmError&) {
                // transient backend trouble; the next cycle retries
            }
        }
    });
}

} // namespace wlmbridge
