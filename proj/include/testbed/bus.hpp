#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "testbed/bytes.hpp"
#include "testbed/codec.hpp"
#include "testbed/frames.hpp"
#include "testbed/sim_time.hpp"

namespace testbed {

class BusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Delivery latency: fixed + uniform jitter in [-jitter, +jitter], clamped at 0.
struct LatencyModel {
    SimTime fixedNs = 100 * kMicrosecond;
    SimTime jitterNs = 0;
};

struct SubscriptionFilter {
    std::set<std::uint16_t> ethertypes;            // empty = match any
    std::optional<std::set<MacAddress>> dstMacs;   // nullopt = match any
};

struct CaptureRecord {
    SimTime publishAt = 0;
    SimTime deliverAt = 0; // receipt time at the capture tap
    std::shared_ptr<const Bytes> frame;
    std::string publisher;
};

struct BusStats {
    std::uint64_t framesPublished = 0;
    std::uint64_t framesDelivered = 0;
    std::uint64_t timersFired = 0;
    std::uint64_t eventsProcessed = 0;

    bool operator==(const BusStats&) const = default;
};

// Deterministic single-threaded discrete-event substation LAN. Subscribers
// get frame deliveries, devices get timers; everything is processed in
// (time, sequence) order, so identical wiring + seed replays identically.
class ProcessBus {
public:
    using FrameHandler = std::function<void(SimTime, const Bytes&)>;
    using TimerHandler = std::function<void(SimTime, std::uint64_t tag)>;

    explicit ProcessBus(LatencyModel latency = {}, std::uint64_t seed = 1)
        : latency_(latency), rng_(seed) {}

    std::size_t subscribe(const std::string& deviceId, SubscriptionFilter filter, FrameHandler handler) {
        if (started_) throw BusError("subscribe rejected: bus already running");
        subs_.push_back(Subscriber{deviceId, std::move(filter), std::move(handler)});
        return subs_.size() - 1;
    }

    void attach_timer(const std::string& deviceId, TimerHandler handler) {
        if (started_) throw BusError("attach_timer rejected: bus already running");
        timers_[deviceId] = std::move(handler);
    }

    void set_timer(const std::string& deviceId, SimTime fireAt, std::uint64_t tag) {
        if (finished_) throw BusError("set_timer rejected: bus finished");
        if (fireAt < now_)
            throw BusError("set_timer rejected: fireAt " + std::to_string(fireAt) +
                           " is in the past (now " + std::to_string(now_) + ")");
        if (!timers_.count(deviceId))
            throw BusError("set_timer rejected: no timer handler for device '" + deviceId + "'");
        queue_.push(Event{fireAt, nextSeq_++, Event::Timer, 0, nullptr, deviceId, tag});
    }

    void publish(const Bytes& frame, const std::string& publisherId) {
        if (finished_) throw BusError("publish rejected: scenario horizon passed");
        auto shared = std::make_shared<const Bytes>(frame);
        ++stats_.framesPublished;

        // Capture tap first, then subscribers in registration order: the draw
        // order is part of the deterministic contract.
        capture_.push_back(CaptureRecord{now_, now_ + draw_latency(), shared, publisherId});

        FrameKind kind = classify_frame(frame);
        std::uint16_t ethertype = kind == FrameKind::Sv      ? kEthertypeSv
                                  : kind == FrameKind::Goose ? kEthertypeGoose
                                                             : 0;
        std::optional<MacAddress> dst = frame_dst(frame);
        for (std::size_t i = 0; i < subs_.size(); ++i) {
            const SubscriptionFilter& f = subs_[i].filter;
            if (!f.ethertypes.empty() && !f.ethertypes.count(ethertype)) continue;
            if (f.dstMacs && (!dst || !f.dstMacs->count(*dst))) continue;
            queue_.push(Event{now_ + draw_latency(), nextSeq_++, Event::Delivery, i, shared, publisherId, 0});
        }
    }

    // Processes every event with time <= t, in (time, seq) order. Handlers may
    // publish frames and set timers while the run is in progress.
    BusStats run_until(SimTime t) {
        if (t < now_) throw BusError("run_until rejected: time would move backwards");
        started_ = true;
        running_ = true;
        auto wallStart = std::chrono::steady_clock::now();
        SimTime simStart = now_;
        while (!queue_.empty() && queue_.top().at <= t) {
            Event ev = queue_.top();
            queue_.pop();
            now_ = ev.at;
            if (realtime_) pace(wallStart, simStart);
            ++stats_.eventsProcessed;
            if (ev.kind == Event::Delivery) {
                ++stats_.framesDelivered;
                dispatch_delivery(ev);
            } else {
                ++stats_.timersFired;
                dispatch_timer(ev);
            }
        }
        now_ = t;
        running_ = false;
        return stats_;
    }

    // No more traffic accepted; capture export becomes available.
    void finish() {
        if (running_) throw BusError("finish rejected: run in progress");
        finished_ = true;
    }

    SimTime now() const { return now_; }
    const BusStats& stats() const { return stats_; }
    void set_realtime(bool enabled) { realtime_ = enabled; }

    // Capture in delivery order (ties broken by publication order).
    std::vector<CaptureRecord> capture() const {
        std::vector<CaptureRecord> sorted = capture_;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const CaptureRecord& a, const CaptureRecord& b) { return a.deliverAt < b.deliverAt; });
        return sorted;
    }

private:
    struct Subscriber {
        std::string deviceId;
        SubscriptionFilter filter;
        FrameHandler handler;
    };

    struct Event {
        SimTime at;
        std::uint64_t seq;
        enum Kind { Delivery, Timer } kind;
        std::size_t subIdx;
        std::shared_ptr<const Bytes> frame;
        std::string deviceOrPublisher;
        std::uint64_t tag;
    };

    struct EventAfter {
        bool operator()(const Event& a, const Event& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };

    SimTime draw_latency() {
        if (latency_.jitterNs == 0) return latency_.fixedNs;
        std::uint64_t span = 2 * latency_.jitterNs + 1;
        std::int64_t u = static_cast<std::int64_t>(rng_.next_below(span)) -
                         static_cast<std::int64_t>(latency_.jitterNs);
        std::int64_t d = static_cast<std::int64_t>(latency_.fixedNs) + u;
        return d < 0 ? 0 : static_cast<SimTime>(d);
    }

    void dispatch_delivery(const Event& ev) {
        Subscriber& sub = subs_[ev.subIdx];
        try {
            sub.handler(ev.at, *ev.frame);
        } catch (const std::exception& e) {
            throw BusError("device '" + sub.deviceId + "' faulted: " + e.what());
        }
    }

    void dispatch_timer(const Event& ev) {
        auto it = timers_.find(ev.deviceOrPublisher);
        try {
            it->second(ev.at, ev.tag);
        } catch (const std::exception& e) {
            throw BusError("device '" + ev.deviceOrPublisher + "' faulted: " + e.what());
        }
    }

    void pace(std::chrono::steady_clock::time_point wallStart, SimTime simStart) const {
        auto target = wallStart + std::chrono::nanoseconds(now_ - simStart);
        std::this_thread::sleep_until(target);
    }

    LatencyModel latency_;
    SplitMix64 rng_;
    std::vector<Subscriber> subs_;
    std::map<std::string, TimerHandler> timers_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::vector<CaptureRecord> capture_;
    BusStats stats_;
    SimTime now_ = 0;
    std::uint64_t nextSeq_ = 0;
    bool started_ = false;
    bool running_ = false;
    bool finished_ = false;
    bool realtime_ = false;
};

} // namespace testbed
