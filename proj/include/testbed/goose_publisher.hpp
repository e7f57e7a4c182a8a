#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "testbed/bus.hpp"
#include "testbed/codec.hpp"
#include "testbed/frames.hpp"
#include "testbed/sim_time.hpp"

namespace testbed {

struct GoosePublisherConfig {
    std::string deviceId;                   // frames appear under this publisher id
    MacAddress dst = kDefaultGooseDst;
    MacAddress src{};
    std::uint16_t appId = 0x0001;
    std::string goId;
    std::string gocbRef;
    std::string datSet;
    std::uint32_t confRev = 1;
    std::vector<std::uint32_t> retransmissionIntervalsMs = {2, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1000};
    std::uint64_t epochSeconds = 1'700'000'000ULL;
};

// GOOSE publication state machine: stNum increments (and sqNum resets) on
// every state change, retransmissions repeat the same data and timestamp with
// increasing sqNum on the configured back-off schedule.
class GoosePublisher {
public:
    GoosePublisher(ProcessBus& bus, GoosePublisherConfig cfg)
        : bus_(bus), cfg_(std::move(cfg)), timerId_(cfg_.deviceId + "#gpub") {
        if (cfg_.retransmissionIntervalsMs.empty())
            throw std::invalid_argument("retransmission interval list must be nonempty");
        for (std::uint32_t iv : cfg_.retransmissionIntervalsMs)
            if (iv == 0) throw std::invalid_argument("retransmission intervals must be strictly positive");
        bus_.attach_timer(timerId_, [this](SimTime t, std::uint64_t tag) { on_timer(t, tag); });
    }

    // Announce the initial state when the event loop reaches t=0.
    void start(std::vector<bool> initialData) {
        initialData_ = std::move(initialData);
        bus_.set_timer(timerId_, 0, kInitTag);
    }

    void set_state(std::vector<bool> data, SimTime now) {
        ++stNum_;
        sqNum_ = 0;
        data_ = std::move(data);
        t_ = next_timestamp(now);
        ++generation_; // invalidates any pending retransmission
        intervalIdx_ = 0;
        publish(now);
        bus_.set_timer(timerId_, now + interval_ns(0), generation_);
    }

    std::uint32_t stNum() const { return stNum_; }
    std::uint32_t sqNum() const { return sqNum_; }
    const std::string& goId() const { return cfg_.goId; }
    const GoosePublisherConfig& config() const { return cfg_; }

private:
    static constexpr std::uint64_t kInitTag = 0;

    SimTime interval_ns(std::size_t idx) const {
        return static_cast<SimTime>(cfg_.retransmissionIntervalsMs[idx]) * kMillisecond;
    }

    // Timestamp is strictly increasing across state changes even when two
    // changes land within one 2^-24 s tick.
    UtcTimestamp next_timestamp(SimTime now) {
        UtcTimestamp ts = UtcTimestamp::from_sim(cfg_.epochSeconds, now);
        if (stNum_ > 1 && ts <= t_) {
            ts = t_;
            if (++ts.fraction >= (1U << 24)) {
                ts.fraction = 0;
                ++ts.seconds;
            }
        }
        return ts;
    }

    void publish(SimTime now) {
        GooseFrame f;
        f.dst = cfg_.dst;
        f.src = cfg_.src;
        f.appId = cfg_.appId;
        f.gocbRef = cfg_.gocbRef;
        f.datSet = cfg_.datSet;
        f.goId = cfg_.goId;
        f.confRev = cfg_.confRev;
        f.stNum = stNum_;
        f.sqNum = sqNum_;
        f.t = t_;
        f.allData = data_;
        std::size_t nextIdx = intervalIdx_ < cfg_.retransmissionIntervalsMs.size() - 1 ? intervalIdx_ : cfg_.retransmissionIntervalsMs.size() - 1;
        f.timeAllowedToLiveMs = 2 * cfg_.retransmissionIntervalsMs[nextIdx];
        bus_.publish(encode_goose(f), cfg_.deviceId);
        (void)now;
    }

    void on_timer(SimTime t, std::uint64_t tag) {
        if (tag == kInitTag) {
            set_state(initialData_, t);
            return;
        }
        if (tag != generation_) return; // superseded by a newer state
        ++sqNum_;
        if (intervalIdx_ + 1 < cfg_.retransmissionIntervalsMs.size()) ++intervalIdx_;
        publish(t);
        bus_.set_timer(timerId_, t + interval_ns(intervalIdx_), generation_);
    }

    ProcessBus& bus_;
    GoosePublisherConfig cfg_;
    std::string timerId_;
    std::vector<bool> initialData_;
    std::vector<bool> data_;
    UtcTimestamp t_;
    std::uint32_t stNum_ = 0;
    std::uint32_t sqNum_ = 0;
    std::uint64_t generation_ = 0;
    std::size_t intervalIdx_ = 0;
};

} // namespace testbed
