#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "testbed/attacker.hpp"
#include "testbed/bus.hpp"
#include "testbed/codec.hpp"
#include "testbed/devices.hpp"
#include "testbed/nids.hpp"
#include "testbed/sim_time.hpp"
#include "testbed/waveform.hpp"

namespace testbed {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PcProfile { Original, SimulatedIed };
enum class BreakerMode { HardwiredViaMu, DirectGooseBreakerIed };

struct ScenarioFault {
    Phase phase = Phase::A;
    SimTime inceptionNs = 0;
    double faultCurrentPeakA = 0; // 0 = use 10x the normal peak
};

// Declared outcomes a run is checked against; unset fields are not checked.
struct ScenarioExpectations {
    std::optional<bool> breakerOpens;
    std::optional<SimTime> tripTimeNs;
    SimTime tripToleranceNs = kMillisecond;
    std::optional<bool> zeroAlerts;
    std::optional<std::vector<std::string>> firedRulesExactly;
    std::optional<std::vector<std::string>> missedAttacksExactly;
    std::optional<SimTime> detectionUnderNs;
    std::optional<SimTime> taPlusTbNs;
    SimTime taPlusTbToleranceNs = kMillisecond;
    std::optional<SimTime> tcNs;
    SimTime tcToleranceNs = kMillisecond;
    std::optional<std::uint64_t> minAlerts;
};

struct Scenario {
    std::string name = "custom";
    std::uint64_t seed = 1;
    SimTime durationNs = 250 * kMillisecond;
    std::uint64_t epochSeconds = 1'700'000'000ULL;
    SimTime mitigationDeployNs = kMillisecond;

    FeederConfig feeder;
    std::optional<ScenarioFault> fault;
    LatencyModel bus;

    // merging unit
    std::string muSvId = "MU01";
    MacAddress svDst = kDefaultSvDst;
    std::uint16_t svAppId = 0x4000;
    SimTime svProcessingDelayNs = 0;
    SimTime gooseToTripDelayNs = 6 * kMillisecond;

    // protection & control IED
    PcProfile pcProfile = PcProfile::Original;
    std::string pcGoId = "PC1_Trip";
    std::string pcGocbRef = "PC1CFG/LLN0$GO$TripCtl";
    std::string pcDatSet = "PC1CFG/LLN0$TripData";
    MacAddress gooseDst = kDefaultGooseDst;
    std::uint16_t pcAppId = 0x0001;
    double pickupRmsA = 1000.0;
    std::optional<SimTime> pcProcessingDelayNs; // unset = derive from profile
    std::vector<std::uint32_t> retransmissionIntervalsMs = {2, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1000};

    // circuit breaker
    BreakerMode breakerMode = BreakerMode::HardwiredViaMu;
    SimTime directGooseDelayNs = 2 * kMillisecond;
    std::string statusGoId = "XCBR1_Status";
    std::string statusGocbRef = "XCBR1CFG/LLN0$GO$Status";
    std::string statusDatSet = "XCBR1CFG/LLN0$StatusData";
    std::uint16_t statusAppId = 0x0002;

    // intrusion detection
    bool nidsEnabled = true;
    std::set<RuleId> nidsRules = {RuleId::R1, RuleId::R2, RuleId::R3, RuleId::R4};
    SimTime nidsProcessingDelayNs = 300 * kMicrosecond;
    SimTime timestampSkewToleranceNs = 2 * kSecond;
    double svRateTolerance = 0.2;
    std::string nidsGoId = "NIDS_Alert";
    std::string nidsGocbRef = "NIDSCFG/LLN0$GO$Alert";
    std::string nidsDatSet = "NIDSCFG/LLN0$AlertData";
    std::uint16_t nidsAppId = 0x0003;
    std::vector<std::string> extraWhitelistSvIds;
    std::vector<std::string> extraWhitelistGoIds;

    std::vector<AttackSpec> attacks;
    ScenarioExpectations expectations;

    SimTime pc_processing_delay() const {
        if (pcProcessingDelayNs) return *pcProcessingDelayNs;
        return pcProfile == PcProfile::Original ? 12'900 * kMicrosecond : 17'900 * kMicrosecond;
    }

    double fault_peak() const {
        if (!fault) return 0;
        return fault->faultCurrentPeakA > 0 ? fault->faultCurrentPeakA : 10.0 * feeder.normalCurrentPeakA;
    }

    void validate() const;
    Json to_json() const;
    static Scenario from_json(const Json& j);
    static Scenario parse(const std::string& text);
    static Scenario load(const std::string& path);
};

namespace scenario_detail {

inline std::string join_path(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

// Strict object reader: every key must be consumed, leftovers are errors.
class ObjectParser {
public:
    ObjectParser(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object())
            throw ScenarioError("expected an object at '" + (path_.empty() ? "(root)" : path_) + "'");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    template <typename T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        return convert<T>(key);
    }

    template <typename T>
    std::optional<T> get_opt(const std::string& key) {
        seen_.insert(key);
        if (!has(key)) return std::nullopt;
        return convert<T>(key);
    }

    const Json* sub(const std::string& key) {
        seen_.insert(key);
        if (!has(key)) return nullptr;
        return &j_.at(key);
    }

    std::string path(const std::string& key) const { return join_path(path_, key); }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key()))
                throw ScenarioError("unknown key '" + join_path(path_, item.key()) + "'");
        }
    }

private:
    template <typename T>
    T convert(const std::string& key) {
        try {
            return j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ScenarioError("bad value type for key '" + join_path(path_, key) + "'");
        }
    }

    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline Phase phase_from_string(const std::string& s, const std::string& path) {
    if (s == "A") return Phase::A;
    if (s == "B") return Phase::B;
    if (s == "C") return Phase::C;
    throw ScenarioError("bad value for key '" + path + "': expected A, B or C");
}

inline const char* to_string(Phase p) {
    switch (p) {
        case Phase::A: return "A";
        case Phase::B: return "B";
        default: return "C";
    }
}

inline const char* to_string(PcProfile p) {
    return p == PcProfile::Original ? "original" : "simulatedIed";
}

inline const char* to_string(BreakerMode m) {
    return m == BreakerMode::HardwiredViaMu ? "hardwiredViaMu" : "directGooseBreakerIed";
}

inline MacAddress mac_from(const std::string& s, const std::string& path) {
    try {
        return MacAddress::parse(s);
    } catch (const std::invalid_argument&) {
        throw ScenarioError("bad value for key '" + path + "': expected a MAC address");
    }
}

} // namespace scenario_detail

inline void Scenario::validate() const {
    auto fail = [](const std::string& key, const std::string& why) {
        throw ScenarioError("invalid value for key '" + key + "': " + why);
    };
    if (name.empty()) fail("name", "must be nonempty");
    if (durationNs == 0) fail("durationNs", "must be > 0");
    try {
        feeder.validate();
    } catch (const std::invalid_argument& e) {
        fail("feeder", e.what());
    }
    if (feeder.normalCurrentPeakA <= 0) fail("feeder.normalCurrentPeakA", "must be > 0");
    if (pickupRmsA <= 0) fail("pc.pickupRmsA", "must be > 0");
    if (retransmissionIntervalsMs.empty()) fail("pc.retransmissionIntervalsMs", "must be nonempty");
    for (std::uint32_t iv : retransmissionIntervalsMs)
        if (iv == 0) fail("pc.retransmissionIntervalsMs", "intervals must be strictly positive");
    if (fault) {
        if (fault->inceptionNs >= durationNs) fail("fault.inceptionNs", "must lie before durationNs");
        if (fault_peak() <= feeder.normalCurrentPeakA)
            fail("fault.faultCurrentPeakA", "must exceed feeder.normalCurrentPeakA");
    }
    if (muSvId.empty()) fail("mu.svId", "must be nonempty");
    if (!svDst.multicast()) fail("mu.dstMac", "SV destination must be a multicast address");
    if (!gooseDst.multicast()) fail("pc.dstMac", "GOOSE destination must be a multicast address");

    std::set<std::string> knownGoIds = {pcGoId, nidsGoId};
    if (breakerMode == BreakerMode::DirectGooseBreakerIed) knownGoIds.insert(statusGoId);

    for (std::size_t i = 0; i < attacks.size(); ++i) {
        const std::string key = "attacks[" + std::to_string(i) + "]";
        try {
            testbed::validate(attacks[i]);
        } catch (const std::exception& e) {
            fail(key, e.what());
        }
        if (attack_start(attacks[i]) >= durationNs) fail(key, "attack start must lie before durationNs");
        if (const auto* fdi = std::get_if<SvFdiSpec>(&attacks[i])) {
            if (fdi->targetSvId != muSvId)
                fail(key + ".targetSvId", "does not resolve to a configured SV stream");
        } else if (const auto* sp = std::get_if<GooseSpoofSpec>(&attacks[i])) {
            if (!knownGoIds.count(sp->targetGoId))
                fail(key + ".targetGoId", "does not resolve to a configured GOOSE stream");
        } else if (const auto* rp = std::get_if<GooseReplaySpec>(&attacks[i])) {
            if (!knownGoIds.count(decode_goose(rp->capturedFrame).goId))
                fail(key + ".capturedFrameHex", "replayed goId does not resolve to a configured GOOSE stream");
        }
    }
}

inline Json Scenario::to_json() const {
    using scenario_detail::to_string;
    Json j;
    j["name"] = name;
    j["seed"] = seed;
    j["durationNs"] = durationNs;
    j["epochSeconds"] = epochSeconds;
    j["mitigationDeployNs"] = mitigationDeployNs;
    j["feeder"] = {{"frequencyHz", feeder.frequencyHz},
                   {"samplingRateHz", feeder.samplingRateHz},
                   {"normalCurrentPeakA", feeder.normalCurrentPeakA},
                   {"nominalVoltagePeakV", feeder.nominalVoltagePeakV}};
    if (fault) {
        j["fault"] = {{"phase", to_string(fault->phase)},
                      {"inceptionNs", fault->inceptionNs},
                      {"faultCurrentPeakA", fault_peak()}};
    } else {
        j["fault"] = nullptr;
    }
    j["bus"] = {{"fixedLatencyNs", bus.fixedNs}, {"jitterNs", bus.jitterNs}};
    j["mu"] = {{"svId", muSvId},
               {"dstMac", svDst.to_string()},
               {"appId", svAppId},
               {"svProcessingDelayNs", svProcessingDelayNs},
               {"gooseToTripDelayNs", gooseToTripDelayNs}};
    j["pc"] = {{"profile", to_string(pcProfile)},
               {"goId", pcGoId},
               {"gocbRef", pcGocbRef},
               {"datSet", pcDatSet},
               {"dstMac", gooseDst.to_string()},
               {"appId", pcAppId},
               {"pickupRmsA", pickupRmsA},
               {"processingDelayNs", pc_processing_delay()},
               {"retransmissionIntervalsMs", retransmissionIntervalsMs}};
    j["breaker"] = {{"mode", to_string(breakerMode)},
                    {"directGooseDelayNs", directGooseDelayNs},
                    {"statusGoId", statusGoId},
                    {"statusGocbRef", statusGocbRef},
                    {"statusDatSet", statusDatSet},
                    {"statusAppId", statusAppId}};
    std::vector<std::string> rules;
    for (RuleId r : nidsRules) rules.push_back(testbed::to_string(r));
    j["nids"] = {{"enabled", nidsEnabled},
                 {"rules", rules},
                 {"processingDelayNs", nidsProcessingDelayNs},
                 {"timestampSkewToleranceNs", timestampSkewToleranceNs},
                 {"svRateTolerance", svRateTolerance},
                 {"goId", nidsGoId},
                 {"gocbRef", nidsGocbRef},
                 {"datSet", nidsDatSet},
                 {"appId", nidsAppId},
                 {"extraWhitelistSvIds", extraWhitelistSvIds},
                 {"extraWhitelistGoIds", extraWhitelistGoIds}};
    j["attacks"] = Json::array();
    for (const AttackSpec& a : attacks) {
        if (const auto* fdi = std::get_if<SvFdiSpec>(&a)) {
            j["attacks"].push_back({{"kind", "svFdi"},
                                    {"targetSvId", fdi->targetSvId},
                                    {"injectedPeakA", fdi->injectedPeakA},
                                    {"interPacketNs", fdi->interPacketNs},
                                    {"startAtNs", fdi->startAtNs},
                                    {"durationNs", fdi->durationNs}});
        } else if (const auto* rp = std::get_if<GooseReplaySpec>(&a)) {
            j["attacks"].push_back({{"kind", "gooseReplay"},
                                    {"capturedFrameHex", to_hex(rp->capturedFrame)},
                                    {"injectAtNs", rp->injectAtNs}});
        } else {
            const auto& sp = std::get<GooseSpoofSpec>(a);
            std::vector<bool> data = sp.allData;
            j["attacks"].push_back({{"kind", "gooseSpoof"},
                                    {"targetGoId", sp.targetGoId},
                                    {"allData", data},
                                    {"conformant", sp.conformant},
                                    {"injectAtNs", sp.injectAtNs}});
        }
    }
    Json e = Json::object();
    const ScenarioExpectations& x = expectations;
    if (x.breakerOpens) e["breakerOpens"] = *x.breakerOpens;
    if (x.tripTimeNs) {
        e["tripTimeNs"] = *x.tripTimeNs;
        e["tripToleranceNs"] = x.tripToleranceNs;
    }
    if (x.zeroAlerts) e["zeroAlerts"] = *x.zeroAlerts;
    if (x.firedRulesExactly) e["firedRulesExactly"] = *x.firedRulesExactly;
    if (x.missedAttacksExactly) e["missedAttacksExactly"] = *x.missedAttacksExactly;
    if (x.detectionUnderNs) e["detectionUnderNs"] = *x.detectionUnderNs;
    if (x.taPlusTbNs) {
        e["taPlusTbNs"] = *x.taPlusTbNs;
        e["taPlusTbToleranceNs"] = x.taPlusTbToleranceNs;
    }
    if (x.tcNs) {
        e["tcNs"] = *x.tcNs;
        e["tcToleranceNs"] = x.tcToleranceNs;
    }
    if (x.minAlerts) e["minAlerts"] = *x.minAlerts;
    j["expectations"] = e;
    return j;
}

inline Scenario Scenario::from_json(const Json& root) {
    using namespace scenario_detail;
    Scenario s;
    ObjectParser top(root, "");
    s.name = top.get<std::string>("name", s.name);
    s.seed = top.get<std::uint64_t>("seed", s.seed);
    s.durationNs = top.get<SimTime>("durationNs", s.durationNs);
    s.epochSeconds = top.get<std::uint64_t>("epochSeconds", s.epochSeconds);
    s.mitigationDeployNs = top.get<SimTime>("mitigationDeployNs", s.mitigationDeployNs);

    if (const Json* f = top.sub("feeder")) {
        ObjectParser p(*f, "feeder");
        s.feeder.frequencyHz = p.get<double>("frequencyHz", s.feeder.frequencyHz);
        s.feeder.samplingRateHz = p.get<double>("samplingRateHz", s.feeder.samplingRateHz);
        s.feeder.normalCurrentPeakA = p.get<double>("normalCurrentPeakA", s.feeder.normalCurrentPeakA);
        s.feeder.nominalVoltagePeakV = p.get<double>("nominalVoltagePeakV", s.feeder.nominalVoltagePeakV);
        p.finish();
    }
    if (const Json* f = top.sub("fault")) {
        ObjectParser p(*f, "fault");
        ScenarioFault fault;
        fault.phase = phase_from_string(p.get<std::string>("phase", "A"), p.path("phase"));
        fault.inceptionNs = p.get<SimTime>("inceptionNs", 100 * kMillisecond);
        fault.faultCurrentPeakA = p.get<double>("faultCurrentPeakA", 0.0);
        p.finish();
        s.fault = fault;
    }
    if (const Json* f = top.sub("bus")) {
        ObjectParser p(*f, "bus");
        s.bus.fixedNs = p.get<SimTime>("fixedLatencyNs", s.bus.fixedNs);
        s.bus.jitterNs = p.get<SimTime>("jitterNs", s.bus.jitterNs);
        p.finish();
    }
    if (const Json* f = top.sub("mu")) {
        ObjectParser p(*f, "mu");
        s.muSvId = p.get<std::string>("svId", s.muSvId);
        s.svDst = mac_from(p.get<std::string>("dstMac", s.svDst.to_string()), p.path("dstMac"));
        s.svAppId = p.get<std::uint16_t>("appId", s.svAppId);
        s.svProcessingDelayNs = p.get<SimTime>("svProcessingDelayNs", s.svProcessingDelayNs);
        s.gooseToTripDelayNs = p.get<SimTime>("gooseToTripDelayNs", s.gooseToTripDelayNs);
        p.finish();
    }
    if (const Json* f = top.sub("pc")) {
        ObjectParser p(*f, "pc");
        std::string profile = p.get<std::string>("profile", "original");
        if (profile == "original") s.pcProfile = PcProfile::Original;
        else if (profile == "simulatedIed") s.pcProfile = PcProfile::SimulatedIed;
        else throw ScenarioError("bad value for key 'pc.profile': expected original or simulatedIed");
        s.pcGoId = p.get<std::string>("goId", s.pcGoId);
        s.pcGocbRef = p.get<std::string>("gocbRef", s.pcGocbRef);
        s.pcDatSet = p.get<std::string>("datSet", s.pcDatSet);
        s.gooseDst = mac_from(p.get<std::string>("dstMac", s.gooseDst.to_string()), p.path("dstMac"));
        s.pcAppId = p.get<std::uint16_t>("appId", s.pcAppId);
        s.pickupRmsA = p.get<double>("pickupRmsA", s.pickupRmsA);
        s.pcProcessingDelayNs = p.get_opt<SimTime>("processingDelayNs");
        s.retransmissionIntervalsMs =
            p.get<std::vector<std::uint32_t>>("retransmissionIntervalsMs", s.retransmissionIntervalsMs);
        p.finish();
    }
    if (const Json* f = top.sub("breaker")) {
        ObjectParser p(*f, "breaker");
        std::string mode = p.get<std::string>("mode", "hardwiredViaMu");
        if (mode == "hardwiredViaMu") s.breakerMode = BreakerMode::HardwiredViaMu;
        else if (mode == "directGooseBreakerIed") s.breakerMode = BreakerMode::DirectGooseBreakerIed;
        else throw ScenarioError("bad value for key 'breaker.mode': expected hardwiredViaMu or directGooseBreakerIed");
        s.directGooseDelayNs = p.get<SimTime>("directGooseDelayNs", s.directGooseDelayNs);
        s.statusGoId = p.get<std::string>("statusGoId", s.statusGoId);
        s.statusGocbRef = p.get<std::string>("statusGocbRef", s.statusGocbRef);
        s.statusDatSet = p.get<std::string>("statusDatSet", s.statusDatSet);
        s.statusAppId = p.get<std::uint16_t>("statusAppId", s.statusAppId);
        p.finish();
    }
    if (const Json* f = top.sub("nids")) {
        ObjectParser p(*f, "nids");
        s.nidsEnabled = p.get<bool>("enabled", s.nidsEnabled);
        if (p.has("rules")) {
            std::vector<std::string> rules = p.get<std::vector<std::string>>("rules", {});
            s.nidsRules.clear();
            for (const std::string& r : rules) {
                std::optional<RuleId> id = rule_from_string(r);
                if (!id) throw ScenarioError("bad value for key 'nids.rules': unknown rule '" + r + "'");
                s.nidsRules.insert(*id);
            }
        }
        s.nidsProcessingDelayNs = p.get<SimTime>("processingDelayNs", s.nidsProcessingDelayNs);
        s.timestampSkewToleranceNs = p.get<SimTime>("timestampSkewToleranceNs", s.timestampSkewToleranceNs);
        s.svRateTolerance = p.get<double>("svRateTolerance", s.svRateTolerance);
        s.nidsGoId = p.get<std::string>("goId", s.nidsGoId);
        s.nidsGocbRef = p.get<std::string>("gocbRef", s.nidsGocbRef);
        s.nidsDatSet = p.get<std::string>("datSet", s.nidsDatSet);
        s.nidsAppId = p.get<std::uint16_t>("appId", s.nidsAppId);
        s.extraWhitelistSvIds = p.get<std::vector<std::string>>("extraWhitelistSvIds", {});
        s.extraWhitelistGoIds = p.get<std::vector<std::string>>("extraWhitelistGoIds", {});
        p.finish();
    }
    if (const Json* f = top.sub("attacks")) {
        if (!f->is_array()) throw ScenarioError("expected an array at 'attacks'");
        for (std::size_t i = 0; i < f->size(); ++i) {
            const std::string path = "attacks[" + std::to_string(i) + "]";
            ObjectParser p((*f)[i], path);
            std::string kind = p.get<std::string>("kind", "");
            if (kind == "svFdi") {
                SvFdiSpec a;
                a.targetSvId = p.get<std::string>("targetSvId", "");
                a.injectedPeakA = p.get<double>("injectedPeakA", a.injectedPeakA);
                a.interPacketNs = p.get<SimTime>("interPacketNs", a.interPacketNs);
                a.startAtNs = p.get<SimTime>("startAtNs", 0);
                a.durationNs = p.get<SimTime>("durationNs", 0);
                p.finish();
                s.attacks.push_back(a);
            } else if (kind == "gooseReplay") {
                GooseReplaySpec a;
                std::string hex = p.get<std::string>("capturedFrameHex", "");
                try {
                    a.capturedFrame = from_hex(hex);
                } catch (const std::invalid_argument& e) {
                    throw ScenarioError("bad value for key '" + path + ".capturedFrameHex': " + e.what());
                }
                a.injectAtNs = p.get<SimTime>("injectAtNs", 0);
                p.finish();
                s.attacks.push_back(a);
            } else if (kind == "gooseSpoof") {
                GooseSpoofSpec a;
                a.targetGoId = p.get<std::string>("targetGoId", "");
                a.allData = p.get<std::vector<bool>>("allData", a.allData);
                a.conformant = p.get<bool>("conformant", a.conformant);
                a.injectAtNs = p.get<SimTime>("injectAtNs", 0);
                p.finish();
                s.attacks.push_back(a);
            } else {
                throw ScenarioError("bad value for key '" + path +
                                    ".kind': expected svFdi, gooseReplay or gooseSpoof");
            }
        }
    }
    if (const Json* f = top.sub("expectations")) {
        ObjectParser p(*f, "expectations");
        ScenarioExpectations& x = s.expectations;
        x.breakerOpens = p.get_opt<bool>("breakerOpens");
        x.tripTimeNs = p.get_opt<SimTime>("tripTimeNs");
        x.tripToleranceNs = p.get<SimTime>("tripToleranceNs", x.tripToleranceNs);
        x.zeroAlerts = p.get_opt<bool>("zeroAlerts");
        x.firedRulesExactly = p.get_opt<std::vector<std::string>>("firedRulesExactly");
        x.missedAttacksExactly = p.get_opt<std::vector<std::string>>("missedAttacksExactly");
        x.detectionUnderNs = p.get_opt<SimTime>("detectionUnderNs");
        x.taPlusTbNs = p.get_opt<SimTime>("taPlusTbNs");
        x.taPlusTbToleranceNs = p.get<SimTime>("taPlusTbToleranceNs", x.taPlusTbToleranceNs);
        x.tcNs = p.get_opt<SimTime>("tcNs");
        x.tcToleranceNs = p.get<SimTime>("tcToleranceNs", x.tcToleranceNs);
        x.minAlerts = p.get_opt<std::uint64_t>("minAlerts");
        p.finish();
    }
    top.finish();
    s.validate();
    return s;
}

inline Scenario Scenario::parse(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
    }
    return from_json(j);
}

inline Scenario Scenario::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioError("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

// ---------------------------------------------------------------------------
// Built-in scenarios
// ---------------------------------------------------------------------------

namespace builtin_detail {

// Fault timed so that the first faulted sample lands on the positive peak of
// phase A (sample 500 = quarter cycle into its period); with a 20 kA fault
// the very first faulted sample lifts the one-cycle RMS above pickup.
inline ScenarioFault default_fault() {
    return ScenarioFault{Phase::A, 104'166'666, 20'000.0};
}

inline Scenario fault_base(const std::string& name) {
    Scenario s;
    s.name = name;
    s.durationNs = 250 * kMillisecond;
    s.fault = default_fault();
    s.expectations.breakerOpens = true;
    s.expectations.zeroAlerts = true;
    return s;
}

// Trip GOOSE "captured during an earlier fault": stale state/sequence numbers
// and a timestamp far in the past relative to the live stream.
inline Bytes canned_fault_trip_frame(const Scenario& s) {
    GooseFrame f;
    f.dst = s.gooseDst;
    f.src = MacAddress::parse("02:00:00:00:00:02");
    f.appId = s.pcAppId;
    f.gocbRef = s.pcGocbRef;
    f.datSet = s.pcDatSet;
    f.goId = s.pcGoId;
    f.timeAllowedToLiveMs = 16;
    f.t = UtcTimestamp{static_cast<std::uint32_t>(s.epochSeconds - 100), 0, 0};
    f.stNum = 2;
    f.sqNum = 3;
    f.confRev = 1;
    f.allData = {true};
    return encode_goose(f);
}

} // namespace builtin_detail

inline std::vector<std::string> builtin_scenario_names() {
    return {"s1_fault_trip", "s2_fault_trip_simulated_ied", "s3_fault_trip_breaker_ied",
            "s4_sv_fdi", "s5_goose_replay", "s6_goose_spoof"};
}

inline std::string builtin_scenario_summary(const std::string& name) {
    if (name == "s1_fault_trip") return "line-to-ground fault, original P&C profile, hardwired trip";
    if (name == "s2_fault_trip_simulated_ied") return "line-to-ground fault, simulated-IED P&C profile";
    if (name == "s3_fault_trip_breaker_ied") return "line-to-ground fault, breaker IED subscribes to trip GOOSE";
    if (name == "s4_sv_fdi") return "SV false data injection at 20 kA against the P&C IED";
    if (name == "s5_goose_replay") return "replay of a captured trip GOOSE under normal load";
    if (name == "s6_goose_spoof") return "protocol-conformant GOOSE trip spoof (NIDS blind spot)";
    return "";
}

inline Scenario builtin_scenario(const std::string& name) {
    using namespace builtin_detail;
    if (name == "s1_fault_trip") {
        Scenario s = fault_base(name);
        s.pcProfile = PcProfile::Original;
        s.expectations.tripTimeNs = 19 * kMillisecond;
        s.expectations.taPlusTbNs = 13 * kMillisecond;
        s.expectations.tcNs = 6 * kMillisecond;
        return s;
    }
    if (name == "s2_fault_trip_simulated_ied") {
        Scenario s = fault_base(name);
        s.pcProfile = PcProfile::SimulatedIed;
        s.expectations.tripTimeNs = 24 * kMillisecond;
        return s;
    }
    if (name == "s3_fault_trip_breaker_ied") {
        Scenario s = fault_base(name);
        s.breakerMode = BreakerMode::DirectGooseBreakerIed;
        s.expectations.tripTimeNs = 15 * kMillisecond;
        s.expectations.tcNs = 2 * kMillisecond;
        return s;
    }
    if (name == "s4_sv_fdi") {
        Scenario s;
        s.name = name;
        s.durationNs = 400 * kMillisecond;
        SvFdiSpec fdi;
        fdi.targetSvId = s.muSvId;
        fdi.injectedPeakA = 20'000.0;
        // Minimum legal spacing, phased 150 us after a genuine sampling
        // instant: each forged smpCnt reaches subscribers just before its
        // genuine twin.
        fdi.interPacketNs = kSvNominalIntervalNs;
        fdi.startAtNs = 200 * kMillisecond + 150 * kMicrosecond;
        fdi.durationNs = 150 * kMillisecond;
        s.attacks.push_back(fdi);
        s.expectations.breakerOpens = true;
        s.expectations.firedRulesExactly = std::vector<std::string>{"R4"};
        s.expectations.missedAttacksExactly = std::vector<std::string>{};
        s.expectations.minAlerts = 1;
        return s;
    }
    if (name == "s5_goose_replay") {
        Scenario s;
        s.name = name;
        s.durationNs = 400 * kMillisecond;
        GooseReplaySpec replay;
        replay.injectAtNs = 150 * kMillisecond;
        replay.capturedFrame = canned_fault_trip_frame(s);
        s.attacks.push_back(replay);
        s.expectations.breakerOpens = true;
        s.expectations.firedRulesExactly = std::vector<std::string>{"R2", "R3"};
        s.expectations.missedAttacksExactly = std::vector<std::string>{};
        s.expectations.detectionUnderNs = 500 * kMicrosecond;
        s.expectations.minAlerts = 1;
        return s;
    }
    if (name == "s6_goose_spoof") {
        Scenario s;
        s.name = name;
        s.durationNs = 900 * kMillisecond;
        GooseSpoofSpec spoof;
        spoof.targetGoId = s.pcGoId;
        spoof.allData = {true};
        spoof.conformant = true;
        // Inside the 512 ms -> 1024 ms retransmission gap of the live stream.
        spoof.injectAtNs = 520 * kMillisecond;
        s.attacks.push_back(spoof);
        s.expectations.breakerOpens = true;
        s.expectations.zeroAlerts = true;
        s.expectations.missedAttacksExactly = std::vector<std::string>{"gooseSpoof#0"};
        return s;
    }
    throw ScenarioError("unknown built-in scenario '" + name + "'");
}

inline bool is_builtin_scenario(const std::string& name) {
    for (const std::string& n : builtin_scenario_names())
        if (n == name) return true;
    return false;
}

} // namespace testbed
