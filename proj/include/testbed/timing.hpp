#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "testbed/events.hpp"
#include "testbed/sim_time.hpp"

namespace testbed {

// Trip-latency decomposition: T_p = T_a + T_b + T_c, where T_a runs from the
// fault (or injection) to the trip GOOSE entering the publish buffer, T_b is
// the network transfer, and T_c the receipt-to-breaker-operation time.
struct TimingReport {
    SimTime taNs = 0;
    SimTime tbNs = 0;
    SimTime tcNs = 0;
    SimTime tpNs = 0;

    Json to_json() const {
        return Json{{"T_a_ns", taNs}, {"T_b_ns", tbNs}, {"T_c_ns", tcNs}, {"T_p_ns", tpNs}};
    }
};

class IncompleteChain : public std::runtime_error {
public:
    explicit IncompleteChain(const std::string& missing)
        : std::runtime_error("event log has no complete fault-to-trip chain: missing " + missing),
          missing_(missing) {}

    const std::string& missing() const { return missing_; }

private:
    std::string missing_;
};

namespace timing_detail {

inline std::optional<SimTime> first_at_or_after(const std::vector<Json>& events,
                                                const std::string& type, SimTime notBefore) {
    for (const Json& e : events) {
        if (e.at("event") != type) continue;
        SimTime t = e.at("tNs").get<SimTime>();
        if (t >= notBefore) return t;
    }
    return std::nullopt;
}

} // namespace timing_detail

inline TimingReport decompose(const std::vector<Json>& events) {
    using timing_detail::first_at_or_after;

    std::optional<SimTime> origin = first_at_or_after(events, "fault_inception", 0);
    if (!origin) origin = first_at_or_after(events, "attack_start", 0);
    if (!origin) throw IncompleteChain("fault_inception/attack_start");

    std::optional<SimTime> buffered = first_at_or_after(events, "trip_goose_buffered", *origin);
    if (!buffered) throw IncompleteChain("trip_goose_buffered");

    std::optional<SimTime> received = first_at_or_after(events, "trip_goose_received", *buffered);
    if (!received) throw IncompleteChain("trip_goose_received");

    std::optional<SimTime> open = first_at_or_after(events, "breaker_open", *received);
    if (!open) throw IncompleteChain("breaker_open");

    TimingReport r;
    r.taNs = *buffered - *origin;
    r.tbNs = *received - *buffered;
    r.tcNs = *open - *received;
    r.tpNs = *open - *origin;
    return r;
}

inline TimingReport decompose(const EventLog& log) { return decompose(log.records()); }

enum class AttackClass { SvAttack, GooseAttack };

struct WindowAnalysis {
    std::string attackKind;
    SimTime availableWindowNs = 0;
    std::optional<SimTime> detectionLatencyNs; // nullopt when the attack went undetected
    SimTime mitigationDeployNs = 0;
    bool blocked = false;

    Json to_json() const {
        Json j{{"attackKind", attackKind},
               {"availableWindowNs", availableWindowNs},
               {"mitigationDeployNs", mitigationDeployNs},
               {"blocked", blocked}};
        if (detectionLatencyNs) j["detectionLatencyNs"] = *detectionLatencyNs;
        else j["detectionLatencyNs"] = nullptr;
        return j;
    }
};

// SV attacks must be caught before the trip GOOSE is generated (window T_a);
// GOOSE attacks between malicious-GOOSE receipt and breaker actuation (T_c).
inline WindowAnalysis analyze_window(const std::string& attackKind, AttackClass cls,
                                     const TimingReport& report,
                                     std::optional<SimTime> detectionLatencyNs,
                                     SimTime mitigationDeployNs) {
    WindowAnalysis w;
    w.attackKind = attackKind;
    w.availableWindowNs = cls == AttackClass::SvAttack ? report.taNs : report.tcNs;
    w.detectionLatencyNs = detectionLatencyNs;
    w.mitigationDeployNs = mitigationDeployNs;
    w.blocked = detectionLatencyNs && (*detectionLatencyNs + mitigationDeployNs < w.availableWindowNs);
    return w;
}

} // namespace testbed
