#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "testbed/sim_time.hpp"

namespace testbed {

inline constexpr std::uint16_t kEthertypeSv = 0x88BA;
inline constexpr std::uint16_t kEthertypeGoose = 0x88B8;
inline constexpr std::uint16_t kEthertypeVlan = 0x8100;

struct MacAddress {
    std::array<std::uint8_t, 6> octets{};

    auto operator<=>(const MacAddress&) const = default;

    bool multicast() const { return (octets[0] & 0x01) != 0; }

    static MacAddress parse(const std::string& text) {
        MacAddress mac;
        unsigned v[6];
        if (std::sscanf(text.c_str(), "%2x:%2x:%2x:%2x:%2x:%2x",
                        &v[0], &v[1], &v[2], &v[3], &v[4], &v[5]) != 6) {
            throw std::invalid_argument("bad MAC address: " + text);
        }
        for (int i = 0; i < 6; ++i) mac.octets[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v[i]);
        return mac;
    }

    std::string to_string() const {
        char buf[18];
        std::snprintf(buf, sizeof(buf), "%02X:%02X:%02X:%02X:%02X:%02X",
                      octets[0], octets[1], octets[2], octets[3], octets[4], octets[5]);
        return buf;
    }
};

// Default multicast destinations for the virtual process bus.
inline const MacAddress kDefaultSvDst = MacAddress::parse("01:0C:CD:04:00:03");
inline const MacAddress kDefaultGooseDst = MacAddress::parse("01:0C:CD:01:00:01");

struct VlanTag {
    std::uint8_t priority = 4; // 3 bits
    std::uint16_t id = 0;      // 12 bits

    auto operator<=>(const VlanTag&) const = default;
};

// IEC-style UTC timestamp: seconds + 24-bit second fraction.
struct UtcTimestamp {
    std::uint32_t seconds = 0;
    std::uint32_t fraction = 0; // units of 2^-24 s, < 2^24
    std::uint8_t quality = 0;

    auto operator<=>(const UtcTimestamp&) const = default;

    // Whole timestamp as nanoseconds, for ordering and skew checks.
    std::uint64_t total_ns() const {
        return static_cast<std::uint64_t>(seconds) * kSecond +
               static_cast<std::uint64_t>(fraction) * kSecond / (1ULL << 24);
    }

    static UtcTimestamp from_sim(std::uint64_t epochSeconds, SimTime t) {
        UtcTimestamp ts;
        ts.seconds = static_cast<std::uint32_t>(epochSeconds + t / kSecond);
        ts.fraction = static_cast<std::uint32_t>((t % kSecond) * (1ULL << 24) / kSecond);
        return ts;
    }
};

struct SvSample {
    std::int32_t value = 0;     // currents in mA, voltages in 10 mV units
    std::uint32_t quality = 0;  // 0 = good

    auto operator<=>(const SvSample&) const = default;
};

// Decoded Sampled Values frame. Entries 0..3 are phase currents (A, B, C,
// neutral), entries 4..7 the corresponding voltages.
struct SvFrame {
    MacAddress dst;
    MacAddress src;
    std::optional<VlanTag> vlan;
    std::uint16_t appId = 0x4000;
    std::string svId;
    std::uint16_t smpCnt = 0; // 0..4799
    std::uint32_t confRev = 1;
    std::uint8_t smpSynch = 1;
    std::array<SvSample, 8> samples{};

    bool operator==(const SvFrame&) const = default;
};

// Decoded GOOSE frame. allData entry 0 carries the trip command / CB status.
struct GooseFrame {
    MacAddress dst;
    MacAddress src;
    std::optional<VlanTag> vlan;
    std::uint16_t appId = 0x0001;
    std::string gocbRef;
    std::uint32_t timeAllowedToLiveMs = 2000;
    std::string datSet;
    std::string goId;
    UtcTimestamp t;
    std::uint32_t stNum = 1; // >= 1
    std::uint32_t sqNum = 0;
    bool simulation = false;
    std::uint32_t confRev = 1;
    bool ndsCom = false;
    std::vector<bool> allData;

    bool operator==(const GooseFrame&) const = default;
};

enum class FrameKind { Sv, Goose, Other };

inline const char* to_string(FrameKind k) {
    switch (k) {
        case FrameKind::Sv: return "SV";
        case FrameKind::Goose: return "GOOSE";
        default: return "OTHER";
    }
}

} // namespace testbed
