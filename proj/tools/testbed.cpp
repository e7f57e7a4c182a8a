// testbed: scenario-driven virtual substation process bus.
//
//   testbed run --scenario <file|builtin> [--seed N] [--out DIR] [--pcap] [--report]
//   testbed list
//   testbed decode <capture.pcap|capture.jsonl|hex-string>
//   testbed analyze <events.jsonl> [--deploy-ms M]

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "testbed/attacker.hpp"
#include "testbed/capture_io.hpp"
#include "testbed/codec.hpp"
#include "testbed/pcap.hpp"
#include "testbed/runner.hpp"
#include "testbed/scenario.hpp"
#include "testbed/timing.hpp"

using namespace testbed;

namespace {

std::string format_timestamp(SimTime ns) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%llu.%09llus", static_cast<unsigned long long>(ns / kSecond),
                  static_cast<unsigned long long>(ns % kSecond));
    return buf;
}

std::string describe_frame(const Bytes& bytes) {
    std::ostringstream out;
    switch (classify_frame(bytes)) {
        case FrameKind::Sv: {
            try {
                SvFrame f = decode_sv(bytes);
                out << "SV svId=" << f.svId << " smpCnt=" << f.smpCnt << " confRev=" << f.confRev
                    << " dst=" << f.dst.to_string() << " ia=" << f.samples[0].value
                    << "mA ib=" << f.samples[1].value << "mA ic=" << f.samples[2].value << "mA";
            } catch (const CodecError& e) {
                out << "SV <undecodable: " << e.what() << ">";
            }
            break;
        }
        case FrameKind::Goose: {
            try {
                GooseFrame f = decode_goose(bytes);
                out << "GOOSE goId=" << f.goId << " stNum=" << f.stNum << " sqNum=" << f.sqNum
                    << " t=" << f.t.seconds << "+" << f.t.fraction << "/2^24s dst=" << f.dst.to_string()
                    << " allData=[";
                for (std::size_t i = 0; i < f.allData.size(); ++i) out << (i ? "," : "") << (f.allData[i] ? 1 : 0);
                out << "]";
            } catch (const CodecError& e) {
                out << "GOOSE <undecodable: " << e.what() << ">";
            }
            break;
        }
        default:
            out << "OTHER " << bytes.size() << " bytes";
    }
    return out.str();
}

int cmd_run(const std::string& scenarioArg, std::optional<std::uint64_t> seed,
            std::string outDir, bool pcap, bool printReport, bool captureJsonl, bool realtime) {
    Scenario scenario = is_builtin_scenario(scenarioArg) ? builtin_scenario(scenarioArg)
                                                         : Scenario::load(scenarioArg);
    if (seed) scenario.seed = *seed;
    if (outDir.empty()) outDir = "out/" + scenario.name;

    RunOptions options;
    options.outDir = outDir;
    options.writePcap = pcap;
    options.writeCaptureJsonl = captureJsonl;
    options.realtime = realtime;

    RunResult result = run_scenario(scenario, options);

    if (printReport) std::cout << result.reportText;
    std::cerr << "scenario " << scenario.name << ": " << (result.pass ? "PASS" : "FAIL")
              << " (artifacts in " << outDir << ")\n";
    for (const auto& check : result.report["expectations"]["checks"]) {
        std::cerr << "  [" << (check["pass"].get<bool>() ? "ok" : "FAIL") << "] "
                  << check["name"].get<std::string>() << ": " << check["detail"].get<std::string>() << "\n";
    }
    return result.pass ? 0 : 1;
}

int cmd_list() {
    for (const std::string& name : builtin_scenario_names())
        std::cout << name << "  -  " << builtin_scenario_summary(name) << "\n";
    return 0;
}

int cmd_decode(const std::string& input) {
    std::vector<CaptureEntry> entries;
    if (std::filesystem::exists(input)) entries = load_capture(input);
    else entries.push_back({0, "", from_hex(input)});

    for (std::size_t i = 0; i < entries.size(); ++i) {
        std::cout << "#" << i << " t=" << format_timestamp(entries[i].deliverAt);
        if (!entries[i].publisher.empty()) std::cout << " publisher=" << entries[i].publisher;
        std::cout << " " << describe_frame(entries[i].bytes) << "\n";
    }
    return 0;
}

// Offline attack crafting against a recorded capture: learns the stream
// profiles and emits ready-to-inject frames as hex, one per line.
int cmd_craft(const std::string& capturePath, const std::string& kind, const std::string& target,
              double peakA, std::size_t count, bool conformant, const std::vector<bool>& allData,
              SimTime atNs) {
    std::vector<CaptureEntry> entries = load_capture(capturePath);
    StreamProfiles profiles;
    for (const CaptureEntry& e : entries) profiles.observe(e.bytes, e.deliverAt);

    if (kind == "svFdi") {
        auto it = profiles.sv.find(target);
        if (it == profiles.sv.end()) throw std::runtime_error("no SV stream '" + target + "' in capture");
        for (std::size_t k = 0; k < count; ++k) {
            std::uint16_t smpCnt = static_cast<std::uint16_t>((it->second.lastSmpCnt + 1 + k) % 4800);
            std::cout << to_hex(encode_sv(forge::sv_frame(it->second, peakA, smpCnt))) << "\n";
        }
        std::cerr << "crafted " << count << " SV frame(s) for " << target << " at peak " << peakA
                  << " A, smpCnt continuing from " << it->second.lastSmpCnt << "\n";
    } else if (kind == "gooseReplay") {
        const CaptureEntry* last = nullptr;
        for (const CaptureEntry& e : entries) {
            if (classify_frame(e.bytes) != FrameKind::Goose) continue;
            try {
                if (decode_goose(e.bytes).goId == target) last = &e;
            } catch (const CodecError&) {
            }
        }
        if (!last) throw std::runtime_error("no GOOSE stream '" + target + "' in capture");
        std::cout << to_hex(last->bytes) << "\n";
        GooseFrame f = decode_goose(last->bytes);
        std::cerr << "extracted replayable frame: stNum=" << f.stNum << " sqNum=" << f.sqNum << "\n";
    } else if (kind == "gooseSpoof") {
        auto it = profiles.goose.find(target);
        if (it == profiles.goose.end())
            throw std::runtime_error("no GOOSE stream '" + target + "' in capture");
        SimTime injectAt = atNs ? atNs : it->second.lastSeenAt + kMillisecond;
        GooseFrame f = forge::goose_frame(it->second, allData, conformant, injectAt);
        std::cout << to_hex(encode_goose(f)) << "\n";
        std::cerr << "crafted " << (conformant ? "conformant" : "non-conformant")
                  << " spoof: stNum=" << f.stNum << " sqNum=" << f.sqNum << "\n";
    } else {
        throw std::runtime_error("unknown attack kind '" + kind + "'");
    }
    return 0;
}

int cmd_analyze(const std::string& path, double deployMs) {
    std::ifstream f(path);
    if (!f) {
        std::cerr << "cannot open: " << path << "\n";
        return 2;
    }
    std::vector<Json> events;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty()) events.push_back(Json::parse(line));
    }

    Json out;
    TimingReport report;
    try {
        report = decompose(events);
    } catch (const IncompleteChain& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    out = report.to_json();

    SimTime deployNs = static_cast<SimTime>(deployMs * static_cast<double>(kMillisecond));
    Json windows = Json::array();
    for (const Json& e : events) {
        if (e.at("event") != "attack_start") continue;
        std::string kind = e.at("kind").get<std::string>();
        std::string target = e.value("target", std::string{});
        SimTime start = e.at("tNs").get<SimTime>();
        std::optional<SimTime> detection;
        for (const Json& a : events) {
            if (a.at("event") != "alert") continue;
            if (a.value("streamId", std::string{}) != target) continue;
            SimTime detectAt = a.at("detectAtNs").get<SimTime>();
            if (detectAt >= start) {
                detection = detectAt - start;
                break;
            }
        }
        AttackClass cls = kind == "svFdi" ? AttackClass::SvAttack : AttackClass::GooseAttack;
        windows.push_back(analyze_window(kind, cls, report, detection, deployNs).to_json());
    }
    out["windows"] = windows;
    std::cout << out.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Virtual IEC 61850 process-bus security testbed"};
    app.require_subcommand(1);

    std::string scenarioArg;
    std::optional<std::uint64_t> seed;
    std::string outDir;
    bool pcap = false, printReport = false, captureJsonl = false, realtime = false;
    CLI::App* run = app.add_subcommand("run", "run a scenario and write its artifacts");
    run->add_option("--scenario", scenarioArg, "scenario file or built-in name")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--out", outDir, "output directory (default out/<name>)");
    run->add_flag("--pcap", pcap, "also write capture.pcap");
    run->add_flag("--report", printReport, "print report.json to stdout");
    run->add_flag("--capture-jsonl", captureJsonl, "also write capture.jsonl");
    run->add_flag("--realtime", realtime, "pace the event loop against the wall clock");

    CLI::App* list = app.add_subcommand("list", "list built-in scenarios");

    std::string decodeInput;
    CLI::App* decode = app.add_subcommand("decode", "dump frames from a pcap, capture.jsonl or hex string");
    decode->add_option("input", decodeInput, "capture path or hex-encoded frame")->required();

    std::string analyzePath;
    double deployMs = 1.0;
    CLI::App* analyze = app.add_subcommand("analyze", "trip-latency decomposition of an events.jsonl log");
    analyze->add_option("log", analyzePath, "events.jsonl produced by a run")->required();
    analyze->add_option("--deploy-ms", deployMs, "assumed mitigation deployment time (ms)");

    std::string craftCapture, craftKind, craftTarget;
    double craftPeak = 20'000.0;
    std::size_t craftCount = 1;
    bool craftConformant = true;
    std::vector<bool> craftAllData = {true};
    std::uint64_t craftAtNs = 0;
    CLI::App* craft = app.add_subcommand("craft", "craft attack frames offline from a recorded capture");
    craft->add_option("capture", craftCapture, "capture.pcap or capture.jsonl")->required();
    craft->add_option("--kind", craftKind, "svFdi, gooseReplay or gooseSpoof")->required();
    craft->add_option("--target", craftTarget, "svId or goId of the victim stream")->required();
    craft->add_option("--peak", craftPeak, "injected current peak in amperes (svFdi)");
    craft->add_option("--count", craftCount, "number of frames to emit (svFdi)");
    craft->add_flag("--conformant,!--stale", craftConformant, "follow the protocol rules (gooseSpoof)");
    craft->add_option("--all-data", craftAllData, "boolean entries for the spoofed dataset");
    craft->add_option("--at-ns", craftAtNs, "intended injection time for timestamp extrapolation");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(scenarioArg, seed, outDir, pcap, printReport, captureJsonl, realtime);
        if (list->parsed()) return cmd_list();
        if (decode->parsed()) return cmd_decode(decodeInput);
        if (analyze->parsed()) return cmd_analyze(analyzePath, deployMs);
        if (craft->parsed())
            return cmd_craft(craftCapture, craftKind, craftTarget, craftPeak, craftCount,
                             craftConformant, craftAllData, craftAtNs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
