#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "testbed/bus.hpp"
#include "testbed/events.hpp"
#include "testbed/pcap.hpp"

namespace testbed {

inline void export_capture(const std::vector<CaptureRecord>& records, const std::string& path,
                           CaptureFormat format) {
    if (format == CaptureFormat::Pcap) {
        write_pcap(path, records);
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << capture_to_jsonl(records);
    if (!f) throw std::runtime_error("write failed: " + path);
}

struct CaptureEntry {
    SimTime deliverAt = 0;
    std::string publisher;
    Bytes bytes;
};

// Loads a capture written by either exporter (pcap or JSONL).
inline std::vector<CaptureEntry> load_capture(const std::string& path) {
    std::vector<CaptureEntry> entries;
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".pcap") {
        for (const PcapPacket& p : read_pcap(path)) entries.push_back({p.time_ns(), "", p.bytes});
        return entries;
    }
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line);
        entries.push_back({j.value("deliverAtNs", SimTime{0}), j.value("publisher", std::string{}),
                           from_hex(j.at("bytes").get<std::string>())});
    }
    return entries;
}

} // namespace testbed
