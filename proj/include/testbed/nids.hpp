#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "testbed/bus.hpp"
#include "testbed/bytes.hpp"
#include "testbed/codec.hpp"
#include "testbed/events.hpp"
#include "testbed/goose_publisher.hpp"
#include "testbed/sim_time.hpp"

namespace testbed {

enum class RuleId { R1 = 1, R2, R3, R4, R5 };

inline const char* to_string(RuleId r) {
    switch (r) {
        case RuleId::R1: return "R1";
        case RuleId::R2: return "R2";
        case RuleId::R3: return "R3";
        case RuleId::R4: return "R4";
        default: return "R5";
    }
}

inline std::optional<RuleId> rule_from_string(const std::string& s) {
    if (s == "R1") return RuleId::R1;
    if (s == "R2") return RuleId::R2;
    if (s == "R3") return RuleId::R3;
    if (s == "R4") return RuleId::R4;
    if (s == "R5") return RuleId::R5;
    return std::nullopt;
}

struct Alert {
    RuleId ruleId;
    std::string streamId;
    SimTime detectAt;            // offending frame delivery + processing delay
    SimTime offendingDeliverAt;
    std::string detail;
};

struct NidsConfig {
    std::string deviceId = "nids";
    bool enabled = true;
    std::set<std::string> svIdWhitelist;
    std::set<std::string> goIdWhitelist;
    std::set<std::string> gocbRefWhitelist;
    SimTime processingDelayNs = 300 * kMicrosecond;
    SimTime timestampSkewToleranceNs = 2 * kSecond; // 2x max retransmission interval
    double svRateTolerance = 0.2;                   // fraction of the nominal SV interval
    SimTime svNominalIntervalNs = 208'333;
    std::size_t rateWindowFrames = 10;
    std::set<RuleId> enabledRules = {RuleId::R1, RuleId::R2, RuleId::R3, RuleId::R4};
    GoosePublisherConfig alertPublisher;
};

// Rule-based intrusion detection over all SV and GOOSE traffic. Pure
// per-stream state keeps the evaluation independent of how streams are
// interleaved, so results are identical under any partitioning.
class Nids {
public:
    Nids(ProcessBus& bus, EventLog& log, NidsConfig cfg)
        : bus_(bus), log_(log), cfg_(std::move(cfg)), alertPub_(bus, cfg_.alertPublisher) {
        bus_.attach_timer(cfg_.deviceId, [this](SimTime t, std::uint64_t tag) { on_timer(t, tag); });
        bus_.subscribe(cfg_.deviceId, SubscriptionFilter{{kEthertypeSv, kEthertypeGoose}, std::nullopt},
                       [this](SimTime t, const Bytes& bytes) { on_frame(bytes, t); });
    }

    void start() { alertPub_.start({false}); }

    const std::vector<Alert>& alerts() const { return alerts_; }

    std::map<std::string, std::uint64_t> per_rule_counts() const {
        std::map<std::string, std::uint64_t> counts = {
            {"R1", 0}, {"R2", 0}, {"R3", 0}, {"R4", 0}, {"R5", 0}};
        for (const Alert& a : alerts_) ++counts[to_string(a.ruleId)];
        return counts;
    }

    // Evaluates all enabled rules against one delivered frame and updates the
    // per-stream state afterwards. Total: undecodable input yields an R1 alert.
    std::vector<Alert> on_frame(const Bytes& bytes, SimTime deliverAt) {
        std::vector<Alert> found;
        FrameKind kind = classify_frame(bytes);
        if (kind == FrameKind::Sv) {
            try {
                check_sv(decode_sv(bytes), deliverAt, found);
            } catch (const CodecError& e) {
                add(found, RuleId::R1, "<undecodable-sv>", deliverAt, e.what());
            }
        } else if (kind == FrameKind::Goose) {
            try {
                check_goose(decode_goose(bytes), deliverAt, found);
            } catch (const CodecError& e) {
                add(found, RuleId::R1, "<undecodable-goose>", deliverAt, e.what());
            }
        } else {
            add(found, RuleId::R1, "<unknown-ethertype>", deliverAt, "frame is neither SV nor GOOSE");
        }

        for (const Alert& a : found) {
            alerts_.push_back(a);
            log_.emit("alert", a.detectAt,
                      {{"ruleId", to_string(a.ruleId)},
                       {"streamId", a.streamId},
                       {"detectAtNs", a.detectAt},
                       {"latencyNs", a.detectAt - a.offendingDeliverAt},
                       {"detail", a.detail}});
        }
        // One alert GOOSE state change per offending frame, even when several
        // rules fire on it.
        if (!found.empty() && lastAlertScheduledAt_ != found.front().detectAt) {
            lastAlertScheduledAt_ = found.front().detectAt;
            bus_.set_timer(cfg_.deviceId, found.front().detectAt, 1);
        }
        return found;
    }

private:
    struct SvState {
        std::optional<std::uint16_t> expectedNext;
        std::deque<std::pair<std::uint16_t, std::uint64_t>> recent; // (smpCnt, payload digest)
        std::optional<SimTime> lastArrival;
        std::size_t rateViolations = 0;
    };

    struct GoState {
        std::uint32_t stNum = 0;
        std::uint32_t sqNum = 0;
        UtcTimestamp t;
        bool seen = false;
    };

    bool enabled(RuleId r) const { return cfg_.enabledRules.count(r) != 0; }

    void add(std::vector<Alert>& out, RuleId r, const std::string& stream, SimTime deliverAt,
             const std::string& detail) {
        if (!enabled(r)) return;
        out.push_back(Alert{r, stream, deliverAt + cfg_.processingDelayNs, deliverAt, detail});
    }

    static std::uint64_t samples_digest(const SvFrame& f) {
        Bytes raw;
        raw.reserve(64);
        for (const SvSample& s : f.samples) {
            put_i32(raw, s.value);
            put_u32(raw, s.quality);
        }
        return fnv1a64(raw);
    }

    void check_sv(const SvFrame& f, SimTime deliverAt, std::vector<Alert>& out) {
        if (!cfg_.svIdWhitelist.count(f.svId))
            add(out, RuleId::R1, f.svId, deliverAt, "svId not in whitelist");

        SvState& st = svStates_[f.svId];

        std::uint64_t digest = samples_digest(f);
        bool flagged = false;
        for (auto it = st.recent.rbegin(); it != st.recent.rend(); ++it) {
            if (it->first == f.smpCnt) {
                if (it->second != digest) {
                    add(out, RuleId::R4, f.svId, deliverAt,
                        "smpCnt " + std::to_string(f.smpCnt) + " repeated with conflicting payload");
                    flagged = true;
                }
                break;
            }
        }
        if (!flagged && st.expectedNext && f.smpCnt != *st.expectedNext) {
            add(out, RuleId::R4, f.svId, deliverAt,
                "smpCnt " + std::to_string(f.smpCnt) + " does not continue expected " +
                    std::to_string(*st.expectedNext));
        }

        if (st.lastArrival) {
            SimTime gap = deliverAt - *st.lastArrival;
            double tol = cfg_.svRateTolerance * static_cast<double>(cfg_.svNominalIntervalNs);
            double dev = std::abs(static_cast<double>(gap) - static_cast<double>(cfg_.svNominalIntervalNs));
            if (dev > tol) {
                if (++st.rateViolations >= cfg_.rateWindowFrames) {
                    add(out, RuleId::R5, f.svId, deliverAt,
                        "inter-arrival outside tolerance for " + std::to_string(st.rateViolations) +
                            " consecutive frames");
                    st.rateViolations = 0;
                }
            } else {
                st.rateViolations = 0;
            }
        }

        st.expectedNext = static_cast<std::uint16_t>((f.smpCnt + 1) % 4800);
        st.recent.emplace_back(f.smpCnt, digest);
        if (st.recent.size() > kRecentWindow) st.recent.pop_front();
        st.lastArrival = deliverAt;
    }

    void check_goose(const GooseFrame& f, SimTime deliverAt, std::vector<Alert>& out) {
        if (!cfg_.goIdWhitelist.count(f.goId))
            add(out, RuleId::R1, f.goId, deliverAt, "goId not in whitelist");
        else if (!cfg_.gocbRefWhitelist.empty() && !cfg_.gocbRefWhitelist.count(f.gocbRef))
            add(out, RuleId::R1, f.goId, deliverAt, "gocbRef not in whitelist");

        GoState& st = goStates_[f.goId];
        if (st.seen) {
            if (f.stNum < st.stNum) {
                add(out, RuleId::R2, f.goId, deliverAt,
                    "stNum decreased from " + std::to_string(st.stNum) + " to " + std::to_string(f.stNum));
            } else if (f.stNum == st.stNum && f.sqNum <= st.sqNum) {
                add(out, RuleId::R2, f.goId, deliverAt,
                    "sqNum " + std::to_string(f.sqNum) + " did not advance past " + std::to_string(st.sqNum));
            } else if (f.stNum > st.stNum && f.sqNum != 0) {
                add(out, RuleId::R2, f.goId, deliverAt, "sqNum not reset to 0 on stNum change");
            }

            if (f.stNum == st.stNum && f.t != st.t) {
                add(out, RuleId::R3, f.goId, deliverAt, "t changed without stNum change");
            } else if (f.stNum != st.stNum && f.t == st.t) {
                add(out, RuleId::R3, f.goId, deliverAt, "t unchanged across stNum change");
            } else if (f.t.total_ns() + cfg_.timestampSkewToleranceNs < st.t.total_ns()) {
                add(out, RuleId::R3, f.goId, deliverAt, "t older than last seen beyond skew tolerance");
            }
        }
        st.stNum = f.stNum;
        st.sqNum = f.sqNum;
        st.t = f.t;
        st.seen = true;
    }

    void on_timer(SimTime t, std::uint64_t) { alertPub_.set_state({true}, t); }

    static constexpr std::size_t kRecentWindow = 160; // two cycles of distinct smpCnt values

    ProcessBus& bus_;
    EventLog& log_;
    NidsConfig cfg_;
    GoosePublisher alertPub_;
    std::map<std::string, SvState> svStates_;
    std::map<std::string, GoState> goStates_;
    std::vector<Alert> alerts_;
    std::optional<SimTime> lastAlertScheduledAt_;
};

} // namespace testbed
