#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>

namespace wlmbridge {

// Time source for job records. Sim-backed bridges advance a ManualClock in
// lockstep with the simulator (1 tick = 1 s) so lifecycle traces stay
// deterministic; exec-backed bridges use the system clock.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() const = 0;
};

class SystemClock final : public Clock {
public:
    std::int64_t now_ms() const override {
        using namespace std::chrono;
        return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
    }
};

class ManualClock final : public Clock {
public:
    explicit ManualClock(std::int64_t start_ms = 0) : now_(start_ms) {}

    std::int64_t now_ms() const override { return now_.load(); }

    void advance_ms(std::int64_t delta) { now_ += delta; }
    void set_ms(std::int64_t value) { now_ = value; }

private:
    std::atomic<std::int64_t> now_;
};

} // namespace wlmbridge
