#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "clock.hpp"
#include "lifecycle.hpp"
#include "redbox_server.hpp"
#include "simbatch.hpp"

namespace wlmbridge {

// Composition root: one backend adapter, the virtual-node registry mirroring
// its queues, the job store, and optionally the red-box endpoint on top.
//
// Sim-backed bridges run on simulated time: tick(1) advances the cluster one
// second, moves the record clock with it and reconciles. Exec-backed bridges
// use wall time; tick(n) is n reconcile passes.
class Bridge {
public:
    static std::unique_ptr<Bridge> with_sim_backend(SimClusterConfig config);
    static std::unique_ptr<Bridge> with_sim_backend_file(const std::string& config_path);
    // home overrides $HOME as the expansion target for results paths.
    static std::unique_ptr<Bridge> with_pbs_backend(std::string home = "");

    ~Bridge();

    Bridge(const Bridge&) = delete;
    Bridge& operator=(const Bridge&) = delete;

    void serve(const std::string& socket_path);
    void stop();

    void tick(int n);
    void reconcile();
    void refresh_queues();

    // Background loop: tick(1) every interval_ms until stop().
    void start_auto(int interval_ms);

    JobStore& store() { return *store_; }
    VirtualNodeRegistry& registry() { return registry_; }
    SimCluster* sim() { return sim_; }
    ManualClock* manual_clock() { return manual_clock_; }
    const std::string& home() const { return store_->home(); }

private:
    Bridge() = default;

    std::unique_ptr<AdapterContract> adapter_;
    SimCluster* sim_ = nullptr; // borrowed from adapter_ when sim-backed
    std::unique_ptr<Clock> clock_;
    ManualClock* manual_clock_ = nullptr;
    VirtualNodeRegistry registry_;
    std::unique_ptr<JobStore> store_;
    std::unique_ptr<RedboxServer> server_;

    std::atomic<bool> auto_stop_{true};
    std::thread auto_thread_;
};

} // namespace wlmbridge
