// Acceptance suite: runs every scenario-level criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "testbed/codec.hpp"
#include "testbed/pcap.hpp"
#include "testbed/runner.hpp"
#include "testbed/scenario.hpp"
#include "testbed/sha256.hpp"
#include "testbed/timing.hpp"
#include "testbed/waveform.hpp"

using namespace testbed;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw Failure(msg);
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- deterministic frame generator (mirrors the unit-test generator) ------

std::string gen_ascii(SplitMix64& rng, std::size_t minLen, std::size_t maxLen) {
    std::size_t len = minLen + rng.next_below(maxLen - minLen + 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>(0x20 + rng.next_below(0x5F)));
    return s;
}

MacAddress gen_mac(SplitMix64& rng) {
    MacAddress m;
    for (auto& o : m.octets) o = static_cast<std::uint8_t>(rng.next_below(256));
    return m;
}

SvFrame gen_sv(SplitMix64& rng) {
    SvFrame f;
    f.dst = gen_mac(rng);
    f.src = gen_mac(rng);
    if (rng.next_below(2)) f.vlan = VlanTag{static_cast<std::uint8_t>(rng.next_below(8)),
                                            static_cast<std::uint16_t>(rng.next_below(4096))};
    f.appId = static_cast<std::uint16_t>(rng.next_below(65536));
    f.svId = gen_ascii(rng, 1, 64);
    f.smpCnt = static_cast<std::uint16_t>(rng.next_below(4800));
    f.confRev = static_cast<std::uint32_t>(rng.next());
    f.smpSynch = static_cast<std::uint8_t>(rng.next_below(256));
    for (auto& s : f.samples)
        s = {static_cast<std::int32_t>(rng.next()), static_cast<std::uint32_t>(rng.next())};
    return f;
}

GooseFrame gen_goose(SplitMix64& rng) {
    GooseFrame f;
    f.dst = gen_mac(rng);
    f.src = gen_mac(rng);
    if (rng.next_below(2)) f.vlan = VlanTag{static_cast<std::uint8_t>(rng.next_below(8)),
                                            static_cast<std::uint16_t>(rng.next_below(4096))};
    f.appId = static_cast<std::uint16_t>(rng.next_below(65536));
    f.gocbRef = gen_ascii(rng, 1, 129);
    f.timeAllowedToLiveMs = static_cast<std::uint32_t>(rng.next());
    f.datSet = gen_ascii(rng, 1, 129);
    f.goId = gen_ascii(rng, 1, 129);
    f.t = {static_cast<std::uint32_t>(rng.next()), static_cast<std::uint32_t>(rng.next_below(1U << 24)),
           static_cast<std::uint8_t>(rng.next_below(256))};
    f.stNum = 1 + static_cast<std::uint32_t>(rng.next_below(1u << 30));
    f.sqNum = static_cast<std::uint32_t>(rng.next_below(1u << 30));
    f.simulation = rng.next_below(2) == 1;
    f.confRev = static_cast<std::uint32_t>(rng.next());
    f.ndsCom = rng.next_below(2) == 1;
    std::size_t n = 1 + rng.next_below(24);
    for (std::size_t i = 0; i < n; ++i) f.allData.push_back(rng.next_below(2) == 1);
    return f;
}

// ---- shared scenario runs --------------------------------------------------

struct ScenarioRun {
    RunResult result;
    double runtimeSeconds = 0;
};

std::map<std::string, ScenarioRun>& runs() {
    static std::map<std::string, ScenarioRun> cache;
    return cache;
}

const ScenarioRun& run_of(const std::string& name) {
    auto it = runs().find(name);
    if (it == runs().end()) {
        auto start = std::chrono::steady_clock::now();
        ScenarioRun r;
        r.result = run_scenario(builtin_scenario(name));
        r.runtimeSeconds = elapsed_seconds(start);
        it = runs().emplace(name, std::move(r)).first;
    }
    return it->second;
}

// ---- criteria ---------------------------------------------------------------

void criterion_codec_roundtrip() {
    auto start = std::chrono::steady_clock::now();
    SplitMix64 rng(0xACCE97);
    for (int i = 0; i < 10000; ++i) {
        SvFrame f = gen_sv(rng);
        Bytes b = encode_sv(f);
        SvFrame d = decode_sv(b);
        require(d == f, "SV decode(encode(f)) != f at iteration " + std::to_string(i));
        require(encode_sv(d) == b, "SV re-encode not byte-identical at iteration " + std::to_string(i));
    }
    for (int i = 0; i < 10000; ++i) {
        GooseFrame f = gen_goose(rng);
        Bytes b = encode_goose(f);
        GooseFrame d = decode_goose(b);
        require(d == f, "GOOSE decode(encode(f)) != f at iteration " + std::to_string(i));
        require(encode_goose(d) == b, "GOOSE re-encode not byte-identical at iteration " + std::to_string(i));
    }
    double secs = elapsed_seconds(start);
    require(secs < 5.0, "runtime " + std::to_string(secs) + " s exceeds 5 s");
}

void criterion_waveform_rms() {
    FeederConfig cfg;
    BreakerState closed;

    // Samples against an independent direct evaluation of the same law.
    for (double peak : {315.37, 20000.0}) {
        FeederConfig c = cfg;
        c.normalCurrentPeakA = peak;
        for (std::uint64_t n = 0; n < 4800; n += 7) {
            for (Phase p : {Phase::A, Phase::B, Phase::C}) {
                double phi = p == Phase::A ? 0.0 : (p == Phase::B ? -1.0 : 1.0) * 2.0 * 3.14159265358979323846 / 3.0;
                double direct = peak * std::sin(2.0 * 3.14159265358979323846 * 60.0 *
                                                    static_cast<double>(n) / 4800.0 + phi);
                double got = sample(c, std::nullopt, closed, n, p).currentA;
                require(std::abs(got - direct) <= 1e-9 * peak,
                        "sample mismatch at n=" + std::to_string(n));
            }
        }
    }

    // One-cycle RMS of a peak-P sinusoid = P/sqrt(2), any alignment.
    for (double peak : {315.37, 1000.0, 20000.0}) {
        for (std::uint64_t offset : {0ULL, 13ULL, 20ULL, 79ULL}) {
            std::vector<double> window;
            for (std::uint64_t k = 0; k < 80; ++k) {
                double v = peak * std::sin(2.0 * 3.14159265358979323846 *
                                           static_cast<double>(offset + k) / 80.0);
                window.push_back(v);
            }
            double sumSq = 0; // brute-force oracle
            for (double v : window) sumSq += v * v;
            double oracle = std::sqrt(sumSq / 80.0);
            double got = rms(window, 80);
            double expected = peak / std::sqrt(2.0);
            require(std::abs(got - oracle) <= 1e-12 * peak, "rms disagrees with brute-force sum");
            require(std::abs(got - expected) <= 1e-6 * expected,
                    "rms " + std::to_string(got) + " not within 1e-6 of P/sqrt(2)");
        }
    }

    // Reference magnitudes: 20 kA peak -> 14142.1 +/- 1; 315.37 A -> 223.0 +/- 0.1.
    std::vector<double> w20k, wNormal;
    for (std::uint64_t k = 0; k < 80; ++k) {
        w20k.push_back(20000.0 * std::sin(2.0 * 3.14159265358979323846 * static_cast<double>(k) / 80.0));
        wNormal.push_back(315.37 * std::sin(2.0 * 3.14159265358979323846 * static_cast<double>(k) / 80.0));
    }
    require(std::abs(rms(w20k, 80) - 14142.1) <= 1.0, "20 kA RMS outside 14142.1 +/- 1");
    require(std::abs(rms(wNormal, 80) - 223.0) <= 0.1, "normal RMS outside 223.0 +/- 0.1");
}

void check_trip(const std::string& name, SimTime expectedTp) {
    const ScenarioRun& run = run_of(name);
    require(run.result.timing.has_value(), name + ": no complete trip chain");
    const TimingReport& t = *run.result.timing;
    require(t.tpNs == t.taNs + t.tbNs + t.tcNs, name + ": T_p != T_a + T_b + T_c");
    SimTime lo = expectedTp - kMillisecond, hi = expectedTp + kMillisecond;
    require(t.tpNs >= lo && t.tpNs <= hi,
            name + ": T_p " + std::to_string(t.tpNs) + " ns outside " + std::to_string(expectedTp) +
                " +/- 1 ms");
    require(run.runtimeSeconds < 2.0,
            name + ": runtime " + std::to_string(run.runtimeSeconds) + " s exceeds 2 s");
}

void criterion_trip_times() {
    check_trip("s1_fault_trip", 19 * kMillisecond);
    check_trip("s2_fault_trip_simulated_ied", 24 * kMillisecond);
    check_trip("s3_fault_trip_breaker_ied", 15 * kMillisecond);

    const TimingReport& s1 = *run_of("s1_fault_trip").result.timing;
    SimTime taPlusTb = s1.taNs + s1.tbNs;
    require(taPlusTb >= 12 * kMillisecond && taPlusTb <= 14 * kMillisecond,
            "s1: T_a+T_b " + std::to_string(taPlusTb) + " ns not 13 ms +/- 1 ms");
    require(s1.tcNs >= 5 * kMillisecond && s1.tcNs <= 7 * kMillisecond,
            "s1: T_c " + std::to_string(s1.tcNs) + " ns not 6 ms +/- 1 ms");

    const TimingReport& s3 = *run_of("s3_fault_trip_breaker_ied").result.timing;
    require(s3.tcNs >= kMillisecond && s3.tcNs <= 3 * kMillisecond,
            "s3: T_c " + std::to_string(s3.tcNs) + " ns not 2 ms +/- 1 ms");
}

void criterion_sv_fdi() {
    const ScenarioRun& run = run_of("s4_sv_fdi");
    const RunResult& r = run.result;

    SimTime injectionStart = 0;
    for (const Json& e : r.log.records()) {
        if (e.at("event") == "attack_start") {
            injectionStart = e.at("tNs").get<SimTime>();
            break;
        }
    }
    require(injectionStart > 0, "s4: no attack_start event");

    // Independent victim-ingest oracle over the capture: one-deep duplicate
    // suppression, one-cycle window, phase-A RMS.
    std::vector<double> window(80, 0.0);
    std::size_t pos = 0, filled = 0;
    std::optional<std::uint16_t> lastSmpCnt;
    std::optional<SimTime> crossAt;
    for (const CaptureRecord& rec : r.capture) {
        if (classify_frame(*rec.frame) != FrameKind::Sv) continue;
        SvFrame f = decode_sv(*rec.frame);
        if (f.svId != "MU01") continue;
        if (lastSmpCnt && *lastSmpCnt == f.smpCnt) continue;
        lastSmpCnt = f.smpCnt;
        window[pos] = static_cast<double>(f.samples[0].value) / 1000.0;
        pos = (pos + 1) % 80;
        if (filled < 80) ++filled;
        if (filled == 80) {
            double sumSq = 0;
            for (double v : window) sumSq += v * v;
            if (std::sqrt(sumSq / 80.0) > 14000.0 && !crossAt && rec.deliverAt >= injectionStart) {
                crossAt = rec.deliverAt;
            }
        }
    }
    require(crossAt.has_value(), "s4: victim windowed RMS never exceeded 14 kA");
    require(*crossAt - injectionStart <= 16'666'667ULL,
            "s4: RMS crossed 14 kA " + std::to_string(*crossAt - injectionStart) +
                " ns after injection (limit: one cycle)");

    bool tripIssued = false;
    for (const Json& e : r.log.records())
        if (e.at("event") == "trip_goose_buffered" && e.at("device") == "pc1") tripIssued = true;
    require(tripIssued, "s4: no trip GOOSE issued by the P&C IED");

    bool r4 = false;
    for (const Alert& a : r.alerts)
        if (a.ruleId == RuleId::R4) r4 = true;
    require(r4, "s4: rule R4 never fired");

    std::uint64_t maliciousBefore = r.report["attacks"][0]["maliciousFramesBeforeDetection"].get<std::uint64_t>();
    require(maliciousBefore <= 3, "s4: first alert after " + std::to_string(maliciousBefore) +
                                      " malicious frames (limit 3)");
}

void criterion_goose_replay() {
    const RunResult& r = run_of("s5_goose_replay").result;
    require(!r.scenario.fault.has_value(), "s5: scenario unexpectedly configures a fault");
    require(r.breakerOpened, "s5: breaker did not open");

    std::set<std::string> fired;
    for (const Alert& a : r.alerts) fired.insert(to_string(a.ruleId));
    require(fired == std::set<std::string>{"R2", "R3"},
            "s5: fired rule set is not exactly {R2, R3}");

    SimTime detect = r.report["nids"]["firstDetectPlusTransferNs"].get<SimTime>();
    require(detect < 500 * kMicrosecond,
            "s5: detection + alert transfer " + std::to_string(detect) + " ns >= 0.5 ms");
}

void criterion_goose_spoof() {
    const RunResult& r = run_of("s6_goose_spoof").result;
    require(r.breakerOpened, "s6: breaker did not open");
    require(r.alerts.empty(), "s6: expected zero alerts, got " + std::to_string(r.alerts.size()));
    std::vector<std::string> missed = r.report["nids"]["missedAttacks"].get<std::vector<std::string>>();
    require(missed == std::vector<std::string>{"gooseSpoof#0"},
            "s6: missed-attack list does not pin the spoof");
}

void criterion_determinism() {
    for (const std::string& name : {std::string("s1_fault_trip"), std::string("s5_goose_replay")}) {
        RunResult a = run_scenario(builtin_scenario(name));
        RunResult b = run_scenario(builtin_scenario(name));
        std::string shaA = a.report["capture"]["sha256"].get<std::string>();
        std::string shaB = b.report["capture"]["sha256"].get<std::string>();
        require(shaA == shaB, name + ": capture SHA-256 differs between identical runs");
        require(a.reportText == b.reportText, name + ": report JSON differs between identical runs");
    }
}

void criterion_protocol_invariants() {
    for (const std::string& name : builtin_scenario_names()) {
        const RunResult& r = run_of(name).result;
        struct SvSeq { bool seen = false; std::uint16_t last = 0; };
        struct GoSeq { bool seen = false; std::uint32_t stNum = 0, sqNum = 0; UtcTimestamp t; };
        std::map<std::string, SvSeq> sv;   // keyed by publisher|svId
        std::map<std::string, GoSeq> go;   // keyed by publisher|goId
        for (const CaptureRecord& rec : r.capture) {
            FrameKind kind = classify_frame(*rec.frame);
            if (kind == FrameKind::Sv) {
                SvFrame f = decode_sv(*rec.frame);
                SvSeq& s = sv[rec.publisher + "|" + f.svId];
                if (s.seen) {
                    require(f.smpCnt == (s.last + 1) % 4800,
                            name + ": smpCnt stride violated for " + rec.publisher + "|" + f.svId);
                }
                s.seen = true;
                s.last = f.smpCnt;
            } else if (kind == FrameKind::Goose) {
                GooseFrame f = decode_goose(*rec.frame);
                GoSeq& s = go[rec.publisher + "|" + f.goId];
                if (s.seen) {
                    require(f.stNum >= s.stNum, name + ": stNum decreased for " + rec.publisher + "|" + f.goId);
                    if (f.stNum == s.stNum) {
                        require(f.sqNum > s.sqNum,
                                name + ": sqNum not strictly increasing for " + rec.publisher + "|" + f.goId);
                        require(f.t == s.t, name + ": t changed within stNum for " + rec.publisher + "|" + f.goId);
                    } else {
                        require(f.sqNum == 0,
                                name + ": sqNum not reset on stNum change for " + rec.publisher + "|" + f.goId);
                    }
                }
                s.seen = true;
                s.stNum = f.stNum;
                s.sqNum = f.sqNum;
                s.t = f.t;
            }
        }
    }
}

void criterion_window_analysis() {
    TimingReport replayReport{0, 100 * kMicrosecond, 6 * kMillisecond, 0};
    WindowAnalysis w1 = analyze_window("gooseReplay", AttackClass::GooseAttack, replayReport,
                                       300 * kMicrosecond, kMillisecond);
    require(w1.availableWindowNs == 6 * kMillisecond, "replay window is not T_c");
    require(w1.blocked, "replay with 0.3 ms detection + 1 ms deploy must be blocked inside 6 ms");

    TimingReport breakerIedReport{0, 100 * kMicrosecond, 2 * kMillisecond, 0};
    WindowAnalysis w2 = analyze_window("gooseReplay", AttackClass::GooseAttack, breakerIedReport,
                                       300 * kMicrosecond, 2 * kMillisecond);
    require(!w2.blocked, "breaker-IED window of 2 ms cannot absorb 0.3 + 2 ms");

    TimingReport fdiReport{13 * kMillisecond, 100 * kMicrosecond, 6 * kMillisecond, 0};
    SimTime detection = 3 * 208'333ULL + 300 * kMicrosecond;
    WindowAnalysis w3 = analyze_window("svFdi", AttackClass::SvAttack, fdiReport, detection, kMillisecond);
    require(w3.availableWindowNs == 13 * kMillisecond, "SV FDI window is not T_a");
    require(w3.blocked, "FDI detected within the first few packets must be blocked inside T_a");
}

void criterion_zero_false_positives() {
    for (const std::string& name :
         {std::string("s1_fault_trip"), std::string("s2_fault_trip_simulated_ied"),
          std::string("s3_fault_trip_breaker_ied")}) {
        const RunResult& r = run_of(name).result;
        require(r.alerts.empty(),
                name + ": " + std::to_string(r.alerts.size()) + " alert(s) on an attack-free scenario");
    }
}

struct Criterion {
    int id;
    std::string name;
    std::function<void()> fn;
};

} // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "codec round-trip, 10000 randomized SV and GOOSE frames", criterion_codec_roundtrip},
        {2, "waveform and RMS oracles", criterion_waveform_rms},
        {3, "S1/S2/S3 trip times and Eq-style decomposition", criterion_trip_times},
        {4, "S4 SV false data injection at 20 kA", criterion_sv_fdi},
        {5, "S5 GOOSE replay detection", criterion_goose_replay},
        {6, "S6 conformant spoof blind spot", criterion_goose_spoof},
        {7, "determinism: identical seeds, identical artifacts", criterion_determinism},
        {8, "protocol invariants over every built-in capture", criterion_protocol_invariants},
        {9, "detection/mitigation window arithmetic", criterion_window_analysis},
        {10, "zero false positives on S1-S3", criterion_zero_false_positives},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        try {
            c.fn();
            std::printf("criterion %2d: PASS  %s\n", c.id, c.name.c_str());
        } catch (const std::exception& e) {
            ++failures;
            std::printf("criterion %2d: FAIL  %s\n              %s\n", c.id, c.name.c_str(), e.what());
        }
        std::fflush(stdout);
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
