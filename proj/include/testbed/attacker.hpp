#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "testbed/bus.hpp"
#include "testbed/codec.hpp"
#include "testbed/events.hpp"
#include "testbed/frames.hpp"
#include "testbed/sim_time.hpp"

namespace testbed {

// Everything the adversary knows about a stream; built exclusively from
// frames observed on the LAN.
struct SvStreamProfile {
    MacAddress dst;
    MacAddress src;
    std::uint16_t appId = 0;
    std::string svId;
    std::uint32_t confRev = 1;
    std::uint8_t smpSynch = 1;
    std::uint16_t lastSmpCnt = 0;
    std::array<SvSample, 8> lastSamples{};
    SimTime lastSeenAt = 0;
    std::uint64_t framesSeen = 0;
};

struct GooseStreamProfile {
    MacAddress dst;
    MacAddress src;
    std::uint16_t appId = 0;
    std::string gocbRef;
    std::string datSet;
    std::string goId;
    std::uint32_t timeAllowedToLiveMs = 2000;
    std::uint32_t confRev = 1;
    bool simulation = false;
    bool ndsCom = false;
    std::uint32_t stNum = 1;
    std::uint32_t sqNum = 0;
    UtcTimestamp t;
    SimTime lastSeenAt = 0;
    std::uint64_t framesSeen = 0;
};

struct StreamProfiles {
    std::map<std::string, SvStreamProfile> sv;
    std::map<std::string, GooseStreamProfile> goose;
    std::uint64_t undecodable = 0;

    void observe(const Bytes& bytes, SimTime at) {
        FrameKind kind = classify_frame(bytes);
        try {
            if (kind == FrameKind::Sv) {
                SvFrame f = decode_sv(bytes);
                SvStreamProfile& p = sv[f.svId];
                p.dst = f.dst;
                p.src = f.src;
                p.appId = f.appId;
                p.svId = f.svId;
                p.confRev = f.confRev;
                p.smpSynch = f.smpSynch;
                p.lastSmpCnt = f.smpCnt;
                p.lastSamples = f.samples;
                p.lastSeenAt = at;
                ++p.framesSeen;
            } else if (kind == FrameKind::Goose) {
                GooseFrame f = decode_goose(bytes);
                GooseStreamProfile& p = goose[f.goId];
                p.dst = f.dst;
                p.src = f.src;
                p.appId = f.appId;
                p.gocbRef = f.gocbRef;
                p.datSet = f.datSet;
                p.goId = f.goId;
                p.timeAllowedToLiveMs = f.timeAllowedToLiveMs;
                p.confRev = f.confRev;
                p.simulation = f.simulation;
                p.ndsCom = f.ndsCom;
                p.stNum = f.stNum;
                p.sqNum = f.sqNum;
                p.t = f.t;
                p.lastSeenAt = at;
                ++p.framesSeen;
            }
        } catch (const CodecError&) {
            ++undecodable;
        }
    }
};

// Offline variant: recover stream semantics from a recorded capture.
inline StreamProfiles learn_streams(const std::vector<CaptureRecord>& capture) {
    StreamProfiles profiles;
    for (const CaptureRecord& rec : capture) profiles.observe(*rec.frame, rec.deliverAt);
    return profiles;
}

inline constexpr SimTime kSvNominalIntervalNs = 208'333;

struct SvFdiSpec {
    std::string targetSvId;
    double injectedPeakA = 20'000.0;
    SimTime interPacketNs = 250 * kMicrosecond; // >= nominal SV spacing
    SimTime startAtNs = 0;
    SimTime durationNs = 0;
};

struct GooseReplaySpec {
    Bytes capturedFrame; // previously captured GOOSE, re-published verbatim
    SimTime injectAtNs = 0;
};

struct GooseSpoofSpec {
    std::string targetGoId;
    std::vector<bool> allData = {true};
    bool conformant = true;
    SimTime injectAtNs = 0;
};

using AttackSpec = std::variant<SvFdiSpec, GooseReplaySpec, GooseSpoofSpec>;

inline const char* attack_kind(const AttackSpec& spec) {
    if (std::holds_alternative<SvFdiSpec>(spec)) return "svFdi";
    if (std::holds_alternative<GooseReplaySpec>(spec)) return "gooseReplay";
    return "gooseSpoof";
}

inline SimTime attack_start(const AttackSpec& spec) {
    if (const auto* fdi = std::get_if<SvFdiSpec>(&spec)) return fdi->startAtNs;
    if (const auto* rp = std::get_if<GooseReplaySpec>(&spec)) return rp->injectAtNs;
    return std::get<GooseSpoofSpec>(spec).injectAtNs;
}

// Stream the attack targets, as it appears on the wire.
inline std::string attack_target(const AttackSpec& spec) {
    if (const auto* fdi = std::get_if<SvFdiSpec>(&spec)) return fdi->targetSvId;
    if (const auto* rp = std::get_if<GooseReplaySpec>(&spec)) return decode_goose(rp->capturedFrame).goId;
    return std::get<GooseSpoofSpec>(spec).targetGoId;
}

inline void validate(const AttackSpec& spec) {
    if (const auto* fdi = std::get_if<SvFdiSpec>(&spec)) {
        if (fdi->targetSvId.empty()) throw std::invalid_argument("svFdi: targetSvId must be set");
        if (fdi->interPacketNs < kSvNominalIntervalNs)
            throw std::invalid_argument("svFdi: interPacketNs must be >= 208333 (cannot exceed nominal rate)");
        if (fdi->injectedPeakA <= 0) throw std::invalid_argument("svFdi: injectedPeakA must be > 0");
    } else if (const auto* rp = std::get_if<GooseReplaySpec>(&spec)) {
        decode_goose(rp->capturedFrame); // throws unless the bytes are a GOOSE frame
    } else {
        const auto& sp = std::get<GooseSpoofSpec>(spec);
        if (sp.targetGoId.empty()) throw std::invalid_argument("gooseSpoof: targetGoId must be set");
        if (sp.allData.empty()) throw std::invalid_argument("gooseSpoof: allData must be nonempty");
    }
}

namespace forge {

inline UtcTimestamp advance_timestamp(UtcTimestamp base, SimTime deltaNs) {
    std::uint64_t total = base.total_ns() + deltaNs;
    UtcTimestamp ts;
    ts.seconds = static_cast<std::uint32_t>(total / kSecond);
    ts.fraction = static_cast<std::uint32_t>((total % kSecond) * (1ULL << 24) / kSecond);
    ts.quality = base.quality;
    return ts;
}

// Synthetic SV frame cloning the stream identity, with currents generated at
// the protection-stream nominal 60 Hz / 4800 samples per second.
inline SvFrame sv_frame(const SvStreamProfile& base, double peakA, std::uint16_t smpCnt) {
    SvFrame f;
    f.dst = base.dst;
    f.src = base.src;
    f.appId = base.appId;
    f.svId = base.svId;
    f.confRev = base.confRev;
    f.smpSynch = base.smpSynch;
    f.smpCnt = smpCnt;

    double currents[3];
    for (int p = 0; p < 3; ++p) {
        double phi = p == 0 ? 0.0 : (p == 1 ? -2.0 : 2.0) * std::numbers::pi / 3.0;
        double arg = 2.0 * std::numbers::pi * 60.0 * static_cast<double>(smpCnt) / 4800.0 + phi;
        currents[p] = peakA * std::sin(arg);
    }
    for (std::size_t p = 0; p < 3; ++p)
        f.samples[p] = {static_cast<std::int32_t>(std::llround(currents[p] * 1000.0)), 0};
    f.samples[3] = {static_cast<std::int32_t>(
                        std::llround(-(currents[0] + currents[1] + currents[2]) * 1000.0)),
                    0};
    for (std::size_t p = 4; p < 8; ++p) f.samples[p] = base.lastSamples[p]; // voltages as observed
    return f;
}

// Spoofed GOOSE: conformant mode advances the observed counters and
// extrapolates a fresh timestamp; otherwise the stale values are reused.
inline GooseFrame goose_frame(const GooseStreamProfile& p, std::vector<bool> allData, bool conformant,
                              SimTime injectAt) {
    GooseFrame f;
    f.dst = p.dst;
    f.src = p.src;
    f.appId = p.appId;
    f.gocbRef = p.gocbRef;
    f.datSet = p.datSet;
    f.goId = p.goId;
    f.timeAllowedToLiveMs = p.timeAllowedToLiveMs;
    f.confRev = p.confRev;
    f.simulation = p.simulation;
    f.ndsCom = p.ndsCom;
    f.allData = std::move(allData);
    if (conformant) {
        f.stNum = p.stNum + 1;
        f.sqNum = 0;
        f.t = advance_timestamp(p.t, injectAt > p.lastSeenAt ? injectAt - p.lastSeenAt : 0);
    } else {
        f.stNum = p.stNum;
        f.sqNum = p.sqNum;
        f.t = p.t;
    }
    return f;
}

} // namespace forge

// Adversary with LAN access: passively learns stream profiles, then executes
// the configured attacks through the same bus as every other device.
class Attacker {
public:
    Attacker(ProcessBus& bus, EventLog& log, std::vector<AttackSpec> specs,
             std::string deviceId = "attacker")
        : bus_(bus), log_(log), specs_(std::move(specs)), deviceId_(std::move(deviceId)) {
        for (const AttackSpec& s : specs_) validate(s);
        bus_.attach_timer(deviceId_, [this](SimTime t, std::uint64_t tag) { on_timer(t, tag); });
        bus_.subscribe(deviceId_, SubscriptionFilter{{kEthertypeSv, kEthertypeGoose}, std::nullopt},
                       [this](SimTime t, const Bytes& bytes) { profiles_.observe(bytes, t); });
    }

    void start() {
        for (std::size_t i = 0; i < specs_.size(); ++i)
            bus_.set_timer(deviceId_, attack_start(specs_[i]), make_tag(i, 0));
    }

    const StreamProfiles& profiles() const { return profiles_; }

    // Label used in reports and missed-attack bookkeeping.
    static std::string label(const AttackSpec& spec, std::size_t index) {
        return std::string(attack_kind(spec)) + "#" + std::to_string(index);
    }

private:
    static std::uint64_t make_tag(std::size_t spec, std::uint64_t packet) {
        return (static_cast<std::uint64_t>(spec) << 40) | packet;
    }

    void on_timer(SimTime t, std::uint64_t tag) {
        std::size_t spec = static_cast<std::size_t>(tag >> 40);
        std::uint64_t packet = tag & ((1ULL << 40) - 1);
        std::visit([&](const auto& s) { fire(s, spec, packet, t); }, specs_[spec]);
    }

    void fire(const SvFdiSpec& s, std::size_t idx, std::uint64_t packet, SimTime t) {
        if (packet == 0) {
            auto it = profiles_.sv.find(s.targetSvId);
            if (it == profiles_.sv.end())
                throw std::runtime_error("svFdi rejected: no profile for svId '" + s.targetSvId + "'");
            fdiBase_[idx] = it->second; // freeze what was observed before the attack
            log_.emit("attack_start", t,
                      {{"kind", "svFdi"},
                       {"target", s.targetSvId},
                       {"injectedPeakA", s.injectedPeakA},
                       {"interPacketNs", s.interPacketNs},
                       {"label", label(specs_[idx], idx)}});
        }
        const SvStreamProfile& base = fdiBase_[idx];
        std::uint16_t smpCnt = static_cast<std::uint16_t>((base.lastSmpCnt + 1 + packet) % 4800);
        bus_.publish(encode_sv(forge::sv_frame(base, s.injectedPeakA, smpCnt)), deviceId_);
        SimTime next = t + s.interPacketNs;
        if (next < s.startAtNs + s.durationNs) bus_.set_timer(deviceId_, next, make_tag(idx, packet + 1));
    }

    void fire(const GooseReplaySpec& s, std::size_t idx, std::uint64_t, SimTime t) {
        GooseFrame f = decode_goose(s.capturedFrame);
        log_.emit("attack_start", t,
                  {{"kind", "gooseReplay"},
                   {"target", f.goId},
                   {"stNum", f.stNum},
                   {"sqNum", f.sqNum},
                   {"label", label(specs_[idx], idx)}});
        if (!f.allData.empty() && f.allData[0])
            log_.emit("trip_goose_buffered", t, {{"device", deviceId_}, {"goId", f.goId}});
        bus_.publish(s.capturedFrame, deviceId_); // byte-identical reinjection
    }

    void fire(const GooseSpoofSpec& s, std::size_t idx, std::uint64_t, SimTime t) {
        auto it = profiles_.goose.find(s.targetGoId);
        if (it == profiles_.goose.end())
            throw std::runtime_error("gooseSpoof rejected: no profile for goId '" + s.targetGoId + "'");
        GooseFrame f = forge::goose_frame(it->second, s.allData, s.conformant, t);
        log_.emit("attack_start", t,
                  {{"kind", "gooseSpoof"},
                   {"target", s.targetGoId},
                   {"conformant", s.conformant},
                   {"stNum", f.stNum},
                   {"label", label(specs_[idx], idx)}});
        if (!f.allData.empty() && f.allData[0])
            log_.emit("trip_goose_buffered", t, {{"device", deviceId_}, {"goId", f.goId}});
        bus_.publish(encode_goose(f), deviceId_);
    }

    ProcessBus& bus_;
    EventLog& log_;
    std::vector<AttackSpec> specs_;
    std::string deviceId_;
    StreamProfiles profiles_;
    std::map<std::size_t, SvStreamProfile> fdiBase_;
};

} // namespace testbed
