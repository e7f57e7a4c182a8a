#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "testbed/attacker.hpp"
#include "testbed/bus.hpp"
#include "testbed/capture_io.hpp"
#include "testbed/devices.hpp"
#include "testbed/events.hpp"
#include "testbed/nids.hpp"
#include "testbed/pcap.hpp"
#include "testbed/scenario.hpp"
#include "testbed/sha256.hpp"
#include "testbed/timing.hpp"
#include "testbed/waveform.hpp"

namespace testbed {

struct RunOptions {
    std::optional<std::string> outDir;
    bool writePcap = false;
    bool writeCaptureJsonl = false;
    bool realtime = false;
};

struct ExpectationCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunResult {
    Scenario scenario;
    Json report;
    std::string reportText;
    bool pass = false;
    std::vector<CaptureRecord> capture;
    EventLog log;
    std::optional<TimingReport> timing;
    std::vector<Alert> alerts;
    bool breakerOpened = false;
};

namespace runner_detail {

struct AttackOutcome {
    std::string label;
    std::string kind;
    std::string target;
    SimTime startNs = 0;
    std::optional<SimTime> firstAlertDetectAt;
    std::uint64_t maliciousFramesBeforeDetection = 0;
    bool missed = false;
};

inline std::string approx_check(const std::string& name, SimTime measured, SimTime target,
                                SimTime tolerance, std::vector<ExpectationCheck>& out) {
    SimTime lo = target > tolerance ? target - tolerance : 0;
    SimTime hi = target + tolerance;
    bool ok = measured >= lo && measured <= hi;
    std::string detail = std::to_string(measured) + " ns vs " + std::to_string(target) + " +/- " +
                         std::to_string(tolerance) + " ns";
    out.push_back({name, ok, detail});
    return detail;
}

} // namespace runner_detail

inline RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {}) {
    using runner_detail::AttackOutcome;
    scenario.validate();

    RunResult result;
    result.scenario = scenario;

    const std::uint64_t fs = static_cast<std::uint64_t>(scenario.feeder.samplingRateHz);

    std::optional<FaultSpec> fault;
    std::optional<SimTime> faultSnappedNs;
    if (scenario.fault) {
        std::uint64_t n = first_sample_at_or_after(scenario.fault->inceptionNs, fs);
        faultSnappedNs = sample_instant(n, fs);
        fault = FaultSpec{scenario.fault->phase, *faultSnappedNs, scenario.fault_peak()};
    }

    Feeder feeder(scenario.feeder, fault);
    ProcessBus bus(scenario.bus, scenario.seed);
    bus.set_realtime(options.realtime);
    EventLog& log = result.log;

    log.emit("scenario_start", 0, {{"name", scenario.name}, {"seed", scenario.seed}});
    if (faultSnappedNs) {
        log.emit("fault_inception", *faultSnappedNs,
                 {{"phase", scenario_detail::to_string(scenario.fault->phase)},
                  {"faultCurrentPeakA", scenario.fault_peak()}});
    }

    // Device wiring. Construction order fixes subscription order and with it
    // the deterministic tie-break of same-instant deliveries.
    PcConfig pcCfg;
    pcCfg.deviceId = "pc1";
    pcCfg.subscribedSvId = scenario.muSvId;
    pcCfg.pickupRmsA = scenario.pickupRmsA;
    pcCfg.windowSamples = static_cast<std::size_t>(scenario.feeder.samples_per_cycle());
    pcCfg.processingDelayNs = scenario.pc_processing_delay();
    pcCfg.publisher = GoosePublisherConfig{"pc1", scenario.gooseDst,
                                           MacAddress::parse("02:00:00:00:00:02"), scenario.pcAppId,
                                           scenario.pcGoId, scenario.pcGocbRef, scenario.pcDatSet,
                                           1, scenario.retransmissionIntervalsMs, scenario.epochSeconds};
    auto pc = std::make_unique<ProtectionIed>(bus, log, pcCfg);

    MuConfig muCfg;
    muCfg.deviceId = "mu1";
    muCfg.svId = scenario.muSvId;
    muCfg.dst = scenario.svDst;
    muCfg.appId = scenario.svAppId;
    muCfg.svProcessingDelayNs = scenario.svProcessingDelayNs;
    muCfg.gooseToTripDelayNs = scenario.gooseToTripDelayNs;
    muCfg.subscribedGoId = scenario.breakerMode == BreakerMode::HardwiredViaMu ? scenario.pcGoId : "";
    auto mu = std::make_unique<MergingUnit>(bus, feeder, log, muCfg, scenario.durationNs);

    std::unique_ptr<BreakerIed> breakerIed;
    if (scenario.breakerMode == BreakerMode::DirectGooseBreakerIed) {
        BreakerIedConfig bCfg;
        bCfg.deviceId = "xcbr1";
        bCfg.subscribedGoId = scenario.pcGoId;
        bCfg.directGooseDelayNs = scenario.directGooseDelayNs;
        bCfg.statusPublisher = GoosePublisherConfig{"xcbr1", scenario.gooseDst,
                                                    MacAddress::parse("02:00:00:00:00:03"),
                                                    scenario.statusAppId, scenario.statusGoId,
                                                    scenario.statusGocbRef, scenario.statusDatSet,
                                                    1, scenario.retransmissionIntervalsMs,
                                                    scenario.epochSeconds};
        breakerIed = std::make_unique<BreakerIed>(bus, feeder, log, bCfg);
    }

    std::unique_ptr<Nids> nids;
    if (scenario.nidsEnabled) {
        NidsConfig nCfg;
        nCfg.deviceId = "nids";
        nCfg.svIdWhitelist.insert(scenario.muSvId);
        nCfg.goIdWhitelist = {scenario.pcGoId, scenario.nidsGoId};
        nCfg.gocbRefWhitelist = {scenario.pcGocbRef, scenario.nidsGocbRef};
        if (scenario.breakerMode == BreakerMode::DirectGooseBreakerIed) {
            nCfg.goIdWhitelist.insert(scenario.statusGoId);
            nCfg.gocbRefWhitelist.insert(scenario.statusGocbRef);
        }
        for (const std::string& id : scenario.extraWhitelistSvIds) nCfg.svIdWhitelist.insert(id);
        for (const std::string& id : scenario.extraWhitelistGoIds) nCfg.goIdWhitelist.insert(id);
        nCfg.processingDelayNs = scenario.nidsProcessingDelayNs;
        nCfg.timestampSkewToleranceNs = scenario.timestampSkewToleranceNs;
        nCfg.svRateTolerance = scenario.svRateTolerance;
        nCfg.svNominalIntervalNs = static_cast<SimTime>(kSecond / fs);
        nCfg.enabledRules = scenario.nidsRules;
        nCfg.alertPublisher = GoosePublisherConfig{"nids", scenario.gooseDst,
                                                   MacAddress::parse("02:00:00:00:00:04"),
                                                   scenario.nidsAppId, scenario.nidsGoId,
                                                   scenario.nidsGocbRef, scenario.nidsDatSet,
                                                   1, scenario.retransmissionIntervalsMs,
                                                   scenario.epochSeconds};
        nids = std::make_unique<Nids>(bus, log, nCfg);
    }

    std::unique_ptr<Attacker> attacker;
    if (!scenario.attacks.empty()) attacker = std::make_unique<Attacker>(bus, log, scenario.attacks);

    pc->start();
    if (breakerIed) breakerIed->start();
    if (nids) nids->start();
    mu->start();
    if (attacker) attacker->start();

    BusStats stats = bus.run_until(scenario.durationNs);
    bus.finish();
    log.emit("run_end", scenario.durationNs,
             {{"framesPublished", stats.framesPublished},
              {"framesDelivered", stats.framesDelivered},
              {"timersFired", stats.timersFired}});

    result.capture = bus.capture();
    result.breakerOpened = !feeder.breaker().closed;
    if (nids) result.alerts = nids->alerts();

    try {
        result.timing = decompose(log);
    } catch (const IncompleteChain&) {
        result.timing = std::nullopt;
    }

    // Per-attack outcome: first alert on the attacked stream at or after the
    // attack started, plus how many malicious frames were already out by then.
    std::vector<AttackOutcome> outcomes;
    for (std::size_t i = 0; i < scenario.attacks.size(); ++i) {
        const AttackSpec& spec = scenario.attacks[i];
        AttackOutcome o;
        o.label = Attacker::label(spec, i);
        o.kind = attack_kind(spec);
        o.target = attack_target(spec);
        o.startNs = attack_start(spec);
        for (const Alert& a : result.alerts) {
            if (a.streamId == o.target && a.detectAt >= o.startNs) {
                o.firstAlertDetectAt = a.detectAt;
                break;
            }
        }
        o.missed = !o.firstAlertDetectAt.has_value();
        if (o.firstAlertDetectAt) {
            for (const CaptureRecord& rec : result.capture) {
                if (rec.publisher == "attacker" && rec.publishAt >= o.startNs &&
                    rec.publishAt <= *o.firstAlertDetectAt)
                    ++o.maliciousFramesBeforeDetection;
            }
        }
        outcomes.push_back(std::move(o));
    }

    // Detection latency of the first alert, and the in-band path: offending
    // frame delivery -> alert GOOSE delivery.
    std::optional<SimTime> firstAlertLatency;
    std::optional<SimTime> firstDetectPlusTransfer;
    if (!result.alerts.empty()) {
        const Alert& first = result.alerts.front();
        firstAlertLatency = first.detectAt - first.offendingDeliverAt;
        for (const CaptureRecord& rec : result.capture) {
            if (rec.publisher == "nids" && rec.publishAt >= first.detectAt) {
                firstDetectPlusTransfer = rec.deliverAt - first.offendingDeliverAt;
                break;
            }
        }
    }

    // Report assembly (no wall-clock metadata: reports must be reproducible).
    Json report;
    report["scenario"] = scenario.to_json();
    report["stats"] = {{"framesPublished", stats.framesPublished},
                       {"framesDelivered", stats.framesDelivered},
                       {"timersFired", stats.timersFired},
                       {"eventsProcessed", stats.eventsProcessed}};
    report["breaker"] = Json{{"opened", result.breakerOpened}};
    if (result.breakerOpened) report["breaker"]["openAtNs"] = feeder.breaker().lastChangeAt;

    report["timing"] = result.timing ? result.timing->to_json() : Json(nullptr);

    Json nidsJson;
    nidsJson["alertCount"] = result.alerts.size();
    std::set<std::string> fired;
    Json alertsJson = Json::array();
    for (const Alert& a : result.alerts) {
        fired.insert(to_string(a.ruleId));
        if (alertsJson.size() < 200) { // cap the echoed list; the full set is in events.jsonl
            alertsJson.push_back({{"ruleId", to_string(a.ruleId)},
                                  {"streamId", a.streamId},
                                  {"detectAtNs", a.detectAt},
                                  {"latencyNs", a.detectAt - a.offendingDeliverAt}});
        }
    }
    nidsJson["alerts"] = alertsJson;
    nidsJson["firedRules"] = std::vector<std::string>(fired.begin(), fired.end());
    if (nids) nidsJson["perRule"] = nids->per_rule_counts();
    std::vector<std::string> missed;
    for (const AttackOutcome& o : outcomes)
        if (o.missed) missed.push_back(o.label);
    nidsJson["missedAttacks"] = missed;
    if (firstAlertLatency) nidsJson["firstAlertLatencyNs"] = *firstAlertLatency;
    if (firstDetectPlusTransfer) nidsJson["firstDetectPlusTransferNs"] = *firstDetectPlusTransfer;
    report["nids"] = nidsJson;

    Json attacksJson = Json::array();
    Json windowsJson = Json::array();
    for (const AttackOutcome& o : outcomes) {
        Json a{{"label", o.label}, {"kind", o.kind}, {"target", o.target}, {"startNs", o.startNs}};
        if (o.firstAlertDetectAt) {
            a["firstAlertDetectAtNs"] = *o.firstAlertDetectAt;
            a["maliciousFramesBeforeDetection"] = o.maliciousFramesBeforeDetection;
        }
        a["missed"] = o.missed;
        attacksJson.push_back(a);
        if (result.timing) {
            AttackClass cls = o.kind == "svFdi" ? AttackClass::SvAttack : AttackClass::GooseAttack;
            std::optional<SimTime> detLatency;
            if (o.firstAlertDetectAt) detLatency = *o.firstAlertDetectAt - o.startNs;
            windowsJson.push_back(
                analyze_window(o.kind, cls, *result.timing, detLatency, scenario.mitigationDeployNs)
                    .to_json());
        }
    }
    report["attacks"] = attacksJson;
    report["windows"] = windowsJson;

    Bytes pcapBytes = pcap_serialize(result.capture);
    report["capture"] = {{"frameCount", result.capture.size()}, {"sha256", sha256_hex(pcapBytes)}};

    // Expectation evaluation; the exit-code contract keys on this.
    std::vector<ExpectationCheck> checks;
    const ScenarioExpectations& x = scenario.expectations;
    if (x.breakerOpens) {
        checks.push_back({"breakerOpens", result.breakerOpened == *x.breakerOpens,
                          result.breakerOpened ? "breaker opened" : "breaker stayed closed"});
    }
    if (x.tripTimeNs) {
        if (result.timing) {
            runner_detail::approx_check("tripTime", result.timing->tpNs, *x.tripTimeNs,
                                        x.tripToleranceNs, checks);
        } else {
            checks.push_back({"tripTime", false, "no complete trip chain in the event log"});
        }
    }
    if (x.taPlusTbNs) {
        if (result.timing) {
            runner_detail::approx_check("taPlusTb", result.timing->taNs + result.timing->tbNs,
                                        *x.taPlusTbNs, x.taPlusTbToleranceNs, checks);
        } else {
            checks.push_back({"taPlusTb", false, "no complete trip chain in the event log"});
        }
    }
    if (x.tcNs) {
        if (result.timing) {
            runner_detail::approx_check("tc", result.timing->tcNs, *x.tcNs, x.tcToleranceNs, checks);
        } else {
            checks.push_back({"tc", false, "no complete trip chain in the event log"});
        }
    }
    if (x.zeroAlerts) {
        bool ok = (result.alerts.size() == 0) == *x.zeroAlerts;
        checks.push_back({"zeroAlerts", ok, std::to_string(result.alerts.size()) + " alert(s)"});
    }
    if (x.minAlerts) {
        bool ok = result.alerts.size() >= *x.minAlerts;
        checks.push_back({"minAlerts", ok, std::to_string(result.alerts.size()) + " alert(s)"});
    }
    if (x.firedRulesExactly) {
        std::set<std::string> expected(x.firedRulesExactly->begin(), x.firedRulesExactly->end());
        bool ok = fired == expected;
        std::string detail = "fired {";
        for (const std::string& r : fired) detail += r + " ";
        detail += "}";
        checks.push_back({"firedRulesExactly", ok, detail});
    }
    if (x.missedAttacksExactly) {
        std::vector<std::string> expected = *x.missedAttacksExactly;
        std::sort(expected.begin(), expected.end());
        std::vector<std::string> got = missed;
        std::sort(got.begin(), got.end());
        std::string detail = "missed {";
        for (const std::string& m : got) detail += m + " ";
        detail += "}";
        checks.push_back({"missedAttacks", got == expected, detail});
    }
    if (x.detectionUnderNs) {
        bool ok = firstDetectPlusTransfer && *firstDetectPlusTransfer < *x.detectionUnderNs;
        std::string detail = firstDetectPlusTransfer
                                 ? std::to_string(*firstDetectPlusTransfer) + " ns"
                                 : "no alert GOOSE observed";
        checks.push_back({"detectionUnder", ok, detail});
    }

    bool pass = true;
    Json checksJson = Json::array();
    for (const ExpectationCheck& c : checks) {
        pass = pass && c.pass;
        checksJson.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    report["expectations"] = {{"pass", pass}, {"checks", checksJson}};

    result.report = report;
    result.reportText = report.dump(2) + "\n";
    result.pass = pass;

    if (options.outDir) {
        namespace fs = std::filesystem;
        fs::create_directories(*options.outDir);
        fs::path dir(*options.outDir);
        std::ofstream rf(dir / "report.json");
        if (!rf) throw std::runtime_error("cannot write report.json under " + *options.outDir);
        rf << result.reportText;
        log.write((dir / "events.jsonl").string());
        if (options.writePcap)
            export_capture(result.capture, (dir / "capture.pcap").string(), CaptureFormat::Pcap);
        if (options.writeCaptureJsonl)
            export_capture(result.capture, (dir / "capture.jsonl").string(), CaptureFormat::Jsonl);
    }
    return result;
}

} // namespace testbed
