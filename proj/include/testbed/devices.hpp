#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "testbed/bus.hpp"
#include "testbed/codec.hpp"
#include "testbed/events.hpp"
#include "testbed/goose_publisher.hpp"
#include "testbed/sim_time.hpp"
#include "testbed/waveform.hpp"

namespace testbed {

// Wire scaling used by the merging unit: currents in milliamperes, voltages
// in units of 10 millivolts, both as signed 32-bit values.
inline std::int32_t amps_to_wire(double a) {
    double scaled = std::llround(a * 1000.0);
    return static_cast<std::int32_t>(std::clamp(scaled, -2147483648.0, 2147483647.0));
}

inline std::int32_t volts_to_wire(double v) {
    double scaled = std::llround(v * 100.0);
    return static_cast<std::int32_t>(std::clamp(scaled, -2147483648.0, 2147483647.0));
}

inline double wire_to_amps(std::int32_t mA) { return static_cast<double>(mA) / 1000.0; }

struct MuConfig {
    std::string deviceId = "mu1";
    std::string svId = "MU01";
    MacAddress dst = kDefaultSvDst;
    MacAddress src = MacAddress::parse("02:00:00:00:00:01");
    std::uint16_t appId = 0x4000;
    std::uint32_t confRev = 1;
    std::uint8_t smpSynch = 1;
    SimTime svProcessingDelayNs = 0;                       // sample-to-publish share of T_a
    SimTime gooseToTripDelayNs = 6 * kMillisecond;         // T_c in hardwired mode
    std::string subscribedGoId;                            // empty when the breaker IED handles trips
};

// Merging unit: samples the feeder at the configured rate, publishes one SV
// frame per sampling instant, and (in hardwired mode) drives the breaker from
// received GOOSE trip commands.
class MergingUnit {
public:
    MergingUnit(ProcessBus& bus, Feeder& feeder, EventLog& log, MuConfig cfg, SimTime horizonNs)
        : bus_(bus), feeder_(feeder), log_(log), cfg_(std::move(cfg)), horizon_(horizonNs) {
        fs_ = static_cast<std::uint64_t>(feeder_.config().samplingRateHz);
        bus_.attach_timer(cfg_.deviceId, [this](SimTime t, std::uint64_t tag) { on_timer(t, tag); });
        if (!cfg_.subscribedGoId.empty()) {
            bus_.subscribe(cfg_.deviceId, SubscriptionFilter{{kEthertypeGoose}, std::nullopt},
                           [this](SimTime t, const Bytes& bytes) { on_goose(t, bytes); });
        }
    }

    void start() { bus_.set_timer(cfg_.deviceId, 0, make_tag(kTick, 0)); }

    std::uint64_t ignored_frames() const { return ignored_; }

private:
    static constexpr std::uint64_t kTick = 1;
    static constexpr std::uint64_t kPublish = 2;
    static constexpr std::uint64_t kTrip = 3;

    static std::uint64_t make_tag(std::uint64_t kind, std::uint64_t payload) { return (kind << 56) | payload; }

    void on_timer(SimTime t, std::uint64_t tag) {
        std::uint64_t kind = tag >> 56;
        std::uint64_t payload = tag & ((1ULL << 56) - 1);
        if (kind == kTick) {
            tick(t, payload);
        } else if (kind == kPublish) {
            auto it = pending_.find(payload);
            if (it != pending_.end()) {
                bus_.publish(it->second, cfg_.deviceId);
                pending_.erase(it);
            }
        } else if (kind == kTrip) {
            if (feeder_.open_breaker(t)) log_.emit("breaker_open", t, {{"mode", "hardwiredViaMu"}});
        }
    }

    void tick(SimTime t, std::uint64_t n) {
        FeederSample a = feeder_.at(n, Phase::A);
        FeederSample b = feeder_.at(n, Phase::B);
        FeederSample c = feeder_.at(n, Phase::C);

        SvFrame f;
        f.dst = cfg_.dst;
        f.src = cfg_.src;
        f.appId = cfg_.appId;
        f.svId = cfg_.svId;
        f.smpCnt = static_cast<std::uint16_t>(n % 4800);
        f.confRev = cfg_.confRev;
        f.smpSynch = cfg_.smpSynch;
        f.samples[0] = {amps_to_wire(a.currentA), 0};
        f.samples[1] = {amps_to_wire(b.currentA), 0};
        f.samples[2] = {amps_to_wire(c.currentA), 0};
        f.samples[3] = {amps_to_wire(-(a.currentA + b.currentA + c.currentA)), 0};
        f.samples[4] = {volts_to_wire(a.voltageV), 0};
        f.samples[5] = {volts_to_wire(b.voltageV), 0};
        f.samples[6] = {volts_to_wire(c.voltageV), 0};
        f.samples[7] = {volts_to_wire(-(a.voltageV + b.voltageV + c.voltageV)), 0};
        Bytes bytes = encode_sv(f);

        if (cfg_.svProcessingDelayNs == 0) {
            bus_.publish(bytes, cfg_.deviceId);
        } else {
            pending_[n] = std::move(bytes);
            bus_.set_timer(cfg_.deviceId, t + cfg_.svProcessingDelayNs, make_tag(kPublish, n));
        }

        SimTime next = sample_instant(n + 1, fs_);
        if (next < horizon_) bus_.set_timer(cfg_.deviceId, next, make_tag(kTick, n + 1));
    }

    void on_goose(SimTime t, const Bytes& bytes) {
        GooseFrame f;
        try {
            f = decode_goose(bytes);
        } catch (const CodecError&) {
            ++ignored_;
            return;
        }
        if (f.goId != cfg_.subscribedGoId) {
            ++ignored_;
            return;
        }
        if (f.allData.empty() || !f.allData[0]) return;
        if (tripSeen_) return;
        tripSeen_ = true;
        log_.emit("trip_goose_received", t, {{"device", cfg_.deviceId}, {"goId", f.goId}});
        bus_.set_timer(cfg_.deviceId, t + cfg_.gooseToTripDelayNs, make_tag(kTrip, 0));
    }

    ProcessBus& bus_;
    Feeder& feeder_;
    EventLog& log_;
    MuConfig cfg_;
    SimTime horizon_;
    std::uint64_t fs_ = 4800;
    std::map<std::uint64_t, Bytes> pending_;
    std::uint64_t ignored_ = 0;
    bool tripSeen_ = false;
};

struct PcConfig {
    std::string deviceId = "pc1";
    std::string subscribedSvId = "MU01";
    double pickupRmsA = 1000.0;
    std::size_t windowSamples = 80;                 // Fs/f
    SimTime processingDelayNs = 12'900 * kMicrosecond; // SV receipt to GOOSE buffer share of T_a
    GoosePublisherConfig publisher;
};

// Protection & control IED: MMXU sliding one-cycle RMS window, PTOC
// single-threshold overcurrent pickup, CSWI trip command via GOOSE.
class ProtectionIed {
public:
    ProtectionIed(ProcessBus& bus, EventLog& log, PcConfig cfg)
        : bus_(bus), log_(log), cfg_(std::move(cfg)), publisher_(bus, cfg_.publisher) {
        for (auto& ring : rings_) ring.assign(cfg_.windowSamples, 0.0);
        bus_.attach_timer(cfg_.deviceId, [this](SimTime t, std::uint64_t tag) { on_timer(t, tag); });
        bus_.subscribe(cfg_.deviceId, SubscriptionFilter{{kEthertypeSv}, std::nullopt},
                       [this](SimTime t, const Bytes& bytes) { on_sv(t, bytes); });
    }

    void start() { publisher_.start({false}); }

    bool tripped() const { return tripped_; }
    std::uint64_t ignored_frames() const { return ignored_; }
    std::uint64_t duplicate_frames() const { return duplicates_; }
    GoosePublisher& publisher() { return publisher_; }

    // Current one-cycle RMS of a phase window (the MMXU measurement).
    double phase_rms(std::size_t phaseIdx) const {
        return rms(std::span<const double>(rings_[phaseIdx]), cfg_.windowSamples);
    }

private:
    void on_sv(SimTime t, const Bytes& bytes) {
        SvFrame f;
        try {
            f = decode_sv(bytes);
        } catch (const CodecError&) {
            ++ignored_;
            return;
        }
        if (f.svId != cfg_.subscribedSvId) {
            ++ignored_;
            return;
        }
        // A repeated smpCnt is a duplicate of the sample just processed;
        // real subscribers consume each sample index once.
        if (lastSmpCnt_ && *lastSmpCnt_ == f.smpCnt) {
            ++duplicates_;
            return;
        }
        lastSmpCnt_ = f.smpCnt;

        for (std::size_t p = 0; p < 3; ++p) rings_[p][ringPos_] = wire_to_amps(f.samples[p].value);
        ringPos_ = (ringPos_ + 1) % cfg_.windowSamples;
        if (ingested_ < cfg_.windowSamples) ++ingested_;

        if (tripped_ || ingested_ < cfg_.windowSamples) return;
        for (std::size_t p = 0; p < 3; ++p) {
            double r = phase_rms(p);
            if (r > cfg_.pickupRmsA) {
                trip(t, p, r);
                break;
            }
        }
    }

    void trip(SimTime t, std::size_t phaseIdx, double rmsA) {
        tripped_ = true;
        log_.emit("trip_decision", t,
                  {{"device", cfg_.deviceId}, {"phase", phaseIdx}, {"rmsA", rmsA}});
        bus_.set_timer(cfg_.deviceId, t + cfg_.processingDelayNs, 1);
    }

    void on_timer(SimTime t, std::uint64_t) {
        log_.emit("trip_goose_buffered", t, {{"device", cfg_.deviceId}, {"goId", publisher_.goId()}});
        publisher_.set_state({true}, t);
    }

    ProcessBus& bus_;
    EventLog& log_;
    PcConfig cfg_;
    GoosePublisher publisher_;
    std::array<std::vector<double>, 3> rings_;
    std::size_t ringPos_ = 0;
    std::size_t ingested_ = 0;
    std::optional<std::uint16_t> lastSmpCnt_;
    bool tripped_ = false;
    std::uint64_t ignored_ = 0;
    std::uint64_t duplicates_ = 0;
};

struct BreakerIedConfig {
    std::string deviceId = "xcbr1";
    std::string subscribedGoId;
    SimTime directGooseDelayNs = 2 * kMillisecond;
    GoosePublisherConfig statusPublisher;
};

// Breaker IED mode: the breaker subscribes to the trip GOOSE directly,
// bypassing the merging unit, and publishes its status as GOOSE.
class BreakerIed {
public:
    BreakerIed(ProcessBus& bus, Feeder& feeder, EventLog& log, BreakerIedConfig cfg)
        : bus_(bus), feeder_(feeder), log_(log), cfg_(std::move(cfg)), status_(bus, cfg_.statusPublisher) {
        bus_.attach_timer(cfg_.deviceId, [this](SimTime t, std::uint64_t tag) { on_timer(t, tag); });
        bus_.subscribe(cfg_.deviceId, SubscriptionFilter{{kEthertypeGoose}, std::nullopt},
                       [this](SimTime t, const Bytes& bytes) { on_goose(t, bytes); });
    }

    void start() { status_.start({true}); } // entry 0: breaker closed

    std::uint64_t ignored_frames() const { return ignored_; }
    GoosePublisher& status_publisher() { return status_; }

private:
    void on_goose(SimTime t, const Bytes& bytes) {
        GooseFrame f;
        try {
            f = decode_goose(bytes);
        } catch (const CodecError&) {
            ++ignored_;
            return;
        }
        if (f.goId != cfg_.subscribedGoId) {
            ++ignored_;
            return;
        }
        if (f.allData.empty() || !f.allData[0]) return;
        if (tripSeen_) return;
        tripSeen_ = true;
        log_.emit("trip_goose_received", t, {{"device", cfg_.deviceId}, {"goId", f.goId}});
        bus_.set_timer(cfg_.deviceId, t + cfg_.directGooseDelayNs, 1);
    }

    void on_timer(SimTime t, std::uint64_t) {
        if (feeder_.open_breaker(t)) {
            log_.emit("breaker_open", t, {{"mode", "directGooseBreakerIed"}});
            status_.set_state({false}, t);
        }
    }

    ProcessBus& bus_;
    Feeder& feeder_;
    EventLog& log_;
    BreakerIedConfig cfg_;
    GoosePublisher status_;
    std::uint64_t ignored_ = 0;
    bool tripSeen_ = false;
};

} // namespace testbed
