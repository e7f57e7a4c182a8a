#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "testbed/bus.hpp"
#include "testbed/bytes.hpp"
#include "testbed/sim_time.hpp"

namespace testbed {

// Classic pcap container, little-endian, linktype 1 (Ethernet),
// microsecond timestamps.
inline constexpr std::uint32_t kPcapMagic = 0xA1B2C3D4;

namespace pcap_detail {

inline void put_le16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_le32(Bytes& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
}

inline std::uint32_t get_le32(const Bytes& b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

} // namespace pcap_detail

struct PcapPacket {
    std::uint32_t tsSec = 0;
    std::uint32_t tsUsec = 0;
    Bytes bytes;

    SimTime time_ns() const {
        return static_cast<SimTime>(tsSec) * kSecond + static_cast<SimTime>(tsUsec) * kMicrosecond;
    }
};

inline Bytes pcap_serialize(const std::vector<CaptureRecord>& records) {
    using namespace pcap_detail;
    Bytes out;
    put_le32(out, kPcapMagic);
    put_le16(out, 2); // version 2.4
    put_le16(out, 4);
    put_le32(out, 0);     // thiszone
    put_le32(out, 0);     // sigfigs
    put_le32(out, 65535); // snaplen
    put_le32(out, 1);     // linktype: Ethernet
    for (const CaptureRecord& rec : records) {
        put_le32(out, static_cast<std::uint32_t>(rec.deliverAt / kSecond));
        put_le32(out, static_cast<std::uint32_t>((rec.deliverAt % kSecond) / kMicrosecond));
        put_le32(out, static_cast<std::uint32_t>(rec.frame->size()));
        put_le32(out, static_cast<std::uint32_t>(rec.frame->size()));
        out.insert(out.end(), rec.frame->begin(), rec.frame->end());
    }
    return out;
}

inline void write_pcap(const std::string& path, const std::vector<CaptureRecord>& records) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    Bytes data = pcap_serialize(records);
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::vector<PcapPacket> pcap_parse(const Bytes& data) {
    using namespace pcap_detail;
    if (data.size() < 24) throw std::runtime_error("pcap: file shorter than global header");
    if (get_le32(data, 0) != kPcapMagic)
        throw std::runtime_error("pcap: unsupported magic (expected little-endian 0xA1B2C3D4)");
    if (get_le32(data, 20) != 1) throw std::runtime_error("pcap: unsupported linktype (expected Ethernet)");
    std::vector<PcapPacket> packets;
    std::size_t pos = 24;
    while (pos < data.size()) {
        if (pos + 16 > data.size()) throw std::runtime_error("pcap: truncated record header");
        PcapPacket p;
        p.tsSec = get_le32(data, pos);
        p.tsUsec = get_le32(data, pos + 4);
        std::uint32_t inclLen = get_le32(data, pos + 8);
        pos += 16;
        if (pos + inclLen > data.size()) throw std::runtime_error("pcap: truncated record body");
        p.bytes.assign(data.begin() + static_cast<std::ptrdiff_t>(pos),
                       data.begin() + static_cast<std::ptrdiff_t>(pos + inclLen));
        pos += inclLen;
        packets.push_back(std::move(p));
    }
    return packets;
}

inline std::vector<PcapPacket> read_pcap(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return pcap_parse(data);
}

} // namespace testbed
