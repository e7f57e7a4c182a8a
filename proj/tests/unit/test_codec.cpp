#include <catch2/catch.hpp>

#include "testbed/codec.hpp"

#include "gen.hpp"

using namespace testbed;

namespace {

SvFrame reference_sv_frame() {
    SvFrame f;
    f.dst = MacAddress::parse("01:0C:CD:04:00:03");
    f.src = MacAddress::parse("02:00:00:00:00:01");
    f.appId = 0x4000;
    f.svId = "MU01";
    f.smpCnt = 500;
    f.confRev = 1;
    f.smpSynch = 1;
    for (std::size_t i = 0; i < 8; ++i)
        f.samples[i] = {static_cast<std::int32_t>((i + 1) * 1000), static_cast<std::uint32_t>(i)};
    return f;
}

// Byte-for-byte expectation for the frame above, assembled by hand so it does
// not share any code with the encoder under test.
Bytes reference_sv_bytes() {
    Bytes b = {
        0x01, 0x0C, 0xCD, 0x04, 0x00, 0x03,             // dst
        0x02, 0x00, 0x00, 0x00, 0x00, 0x01,             // src
        0x88, 0xBA,                                     // ethertype
        0x40, 0x00,                                     // APPID
        0x00, 0x66,                                     // Length = 8 + 94
        0x00, 0x00, 0x00, 0x00,                         // reserved
        0x60, 0x5C,                                     // savPdu
        0x80, 0x01, 0x01,                               // noASDU = 1
        0xA2, 0x57,                                     // seqASDU
        0x30, 0x55,                                     // ASDU
        0x80, 0x04, 'M', 'U', '0', '1',                 // svId
        0x82, 0x02, 0x01, 0xF4,                         // smpCnt = 500
        0x83, 0x04, 0x00, 0x00, 0x00, 0x01,             // confRev
        0x85, 0x01, 0x01,                               // smpSynch
        0x87, 0x40,                                     // samples, 64 bytes
    };
    for (std::uint32_t i = 0; i < 8; ++i) {
        std::uint32_t v = (i + 1) * 1000;
        b.push_back(static_cast<std::uint8_t>(v >> 24));
        b.push_back(static_cast<std::uint8_t>(v >> 16));
        b.push_back(static_cast<std::uint8_t>(v >> 8));
        b.push_back(static_cast<std::uint8_t>(v));
        b.push_back(static_cast<std::uint8_t>(i >> 24));
        b.push_back(static_cast<std::uint8_t>(i >> 16));
        b.push_back(static_cast<std::uint8_t>(i >> 8));
        b.push_back(static_cast<std::uint8_t>(i));
    }
    return b;
}

GooseFrame reference_goose_frame() {
    GooseFrame f;
    f.dst = MacAddress::parse("01:0C:CD:01:00:01");
    f.src = MacAddress::parse("02:00:00:00:00:02");
    f.appId = 0x0001;
    f.gocbRef = "GC";
    f.timeAllowedToLiveMs = 2000;
    f.datSet = "DS";
    f.goId = "GO";
    f.t = UtcTimestamp{0x01020304, 0x050607, 0x08};
    f.stNum = 2;
    f.sqNum = 3;
    f.simulation = false;
    f.confRev = 1;
    f.ndsCom = false;
    f.allData = {true, false};
    return f;
}

Bytes reference_goose_bytes() {
    return Bytes{
        0x01, 0x0C, 0xCD, 0x01, 0x00, 0x01,             // dst
        0x02, 0x00, 0x00, 0x00, 0x00, 0x02,             // src
        0x88, 0xB8,                                     // ethertype
        0x00, 0x01,                                     // APPID
        0x00, 0x4C,                                     // Length = 8 + 68
        0x00, 0x00, 0x00, 0x00,                         // reserved
        0x61, 0x42,                                     // goosePdu
        0x80, 0x02, 'G', 'C',                           // gocbRef
        0x81, 0x04, 0x00, 0x00, 0x07, 0xD0,             // timeAllowedToLive
        0x82, 0x02, 'D', 'S',                           // datSet
        0x83, 0x02, 'G', 'O',                           // goId
        0x84, 0x08, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08, // t
        0x85, 0x04, 0x00, 0x00, 0x00, 0x02,             // stNum
        0x86, 0x04, 0x00, 0x00, 0x00, 0x03,             // sqNum
        0x87, 0x01, 0x00,                               // simulation
        0x88, 0x04, 0x00, 0x00, 0x00, 0x01,             // confRev
        0x89, 0x01, 0x00,                               // ndsCom
        0x8A, 0x04, 0x00, 0x00, 0x00, 0x02,             // numDatSetEntries
        0xAB, 0x06, 0x83, 0x01, 0x01, 0x83, 0x01, 0x00, // allData [true, false]
    };
}

} // namespace

TEST_CASE("SV frame encodes to the documented wire layout") {
    CHECK(encode_sv(reference_sv_frame()) == reference_sv_bytes());
}

TEST_CASE("GOOSE frame encodes to the documented wire layout") {
    CHECK(encode_goose(reference_goose_frame()) == reference_goose_bytes());
}

TEST_CASE("SV round-trip and ethertype") {
    SvFrame f;
    f.dst = kDefaultSvDst;
    f.src = MacAddress::parse("02:00:00:00:00:01");
    f.svId = "MU01";
    f.smpCnt = 0;
    Bytes b = encode_sv(f);
    CHECK(b[12] == 0x88);
    CHECK(b[13] == 0xBA);
    CHECK(decode_sv(b) == f);
    CHECK(encode_sv(decode_sv(b)) == b);
}

TEST_CASE("SV destination MAC leads the encoded frame") {
    SvFrame f = reference_sv_frame();
    Bytes b = encode_sv(f);
    Bytes expected = {0x01, 0x0C, 0xCD, 0x04, 0x00, 0x03};
    CHECK(Bytes(b.begin(), b.begin() + 6) == expected);
}

TEST_CASE("GOOSE trip boolean entry encodes as 83 01 01") {
    GooseFrame f = reference_goose_frame();
    f.allData = {true};
    Bytes b = encode_goose(f);
    Bytes tail = {0xAB, 0x03, 0x83, 0x01, 0x01};
    REQUIRE(b.size() > tail.size());
    CHECK(Bytes(b.end() - static_cast<std::ptrdiff_t>(tail.size()), b.end()) == tail);
    CHECK(decode_goose(b) == f);
}

TEST_CASE("invariant violations are rejected with the offending field named") {
    SvFrame sv = reference_sv_frame();
    sv.smpCnt = 4800;
    try {
        encode_sv(sv);
        FAIL("encode_sv accepted smpCnt 4800");
    } catch (const CodecError& e) {
        CHECK(e.field() == "smpCnt");
        CHECK(e.kind() == CodecError::Kind::Invariant);
    }

    GooseFrame go = reference_goose_frame();
    go.stNum = 0;
    try {
        encode_goose(go);
        FAIL("encode_goose accepted stNum 0");
    } catch (const CodecError& e) {
        CHECK(e.field() == "stNum");
    }

    go = reference_goose_frame();
    go.allData.clear();
    CHECK_THROWS_AS(encode_goose(go), CodecError);

    sv = reference_sv_frame();
    sv.svId = "";
    try {
        encode_sv(sv);
        FAIL("encode_sv accepted empty svId");
    } catch (const CodecError& e) {
        CHECK(e.field() == "svId");
    }
}

TEST_CASE("decoder rejects a frame with the last byte removed") {
    Bytes b = encode_sv(reference_sv_frame());
    b.pop_back();
    try {
        decode_sv(b);
        FAIL("decode_sv accepted truncated input");
    } catch (const CodecError& e) {
        CHECK((e.kind() == CodecError::Kind::Truncated || e.kind() == CodecError::Kind::LengthMismatch));
    }
}

TEST_CASE("decoder rejects an inner TLV that overruns its container") {
    Bytes b = encode_sv(reference_sv_frame());
    // svId TLV length byte sits right after the ASDU header; bump it.
    // Layout: ... 0x30 0x55 0x80 <len> ...
    for (std::size_t i = 0; i + 3 < b.size(); ++i) {
        if (b[i] == 0x30 && b[i + 2] == 0x80) {
            b[i + 3] = 0x70; // declared svId length larger than the container
            break;
        }
    }
    try {
        decode_sv(b);
        FAIL("decode_sv accepted an overrunning TLV");
    } catch (const CodecError& e) {
        CHECK((e.kind() == CodecError::Kind::Truncated || e.kind() == CodecError::Kind::LengthMismatch ||
               e.kind() == CodecError::Kind::BadValue));
    }
}

TEST_CASE("decoder rejects a wire Length field that disagrees with the APDU") {
    Bytes b = encode_sv(reference_sv_frame());
    b[17] = static_cast<std::uint8_t>(b[17] + 1);
    try {
        decode_sv(b);
        FAIL("decode_sv accepted a bad Length field");
    } catch (const CodecError& e) {
        CHECK(e.kind() == CodecError::Kind::LengthMismatch);
        CHECK(e.field() == "length");
    }
}

TEST_CASE("decoder rejects numDatSetEntries that disagrees with allData") {
    Bytes b = reference_goose_bytes();
    // Patch numDatSetEntries from 2 to 3; container still holds 2 booleans.
    std::size_t at = b.size() - 8 - 6 + 2; // start of the 4-byte count value
    REQUIRE(b[at - 2] == 0x8A);
    b[at + 3] = 3;
    // Fix nothing else: Length still matches, only the count is inconsistent.
    try {
        decode_goose(b);
        FAIL("decode_goose accepted inconsistent numDatSetEntries");
    } catch (const CodecError& e) {
        CHECK(e.field() == "numDatSetEntries");
    }
}

TEST_CASE("decoder rejects smpCnt beyond 4799 on the wire") {
    Bytes b = reference_sv_bytes();
    // smpCnt value bytes follow the 0x82 0x02 header.
    for (std::size_t i = 0; i + 3 < b.size(); ++i) {
        if (b[i] == 0x82 && b[i + 1] == 0x02) {
            b[i + 2] = 0x12; // 4800
            b[i + 3] = 0xC0;
            break;
        }
    }
    try {
        decode_sv(b);
        FAIL("decode_sv accepted smpCnt 4800");
    } catch (const CodecError& e) {
        CHECK(e.field() == "smpCnt");
    }
}

TEST_CASE("classify_frame by ethertype") {
    CHECK(classify_frame(encode_sv(reference_sv_frame())) == FrameKind::Sv);
    CHECK(classify_frame(encode_goose(reference_goose_frame())) == FrameKind::Goose);

    Bytes ipv4(60, 0);
    ipv4[12] = 0x08;
    ipv4[13] = 0x00;
    CHECK(classify_frame(ipv4) == FrameKind::Other);
    CHECK(classify_frame(Bytes{}) == FrameKind::Other);
    CHECK(classify_frame(Bytes(13, 0xFF)) == FrameKind::Other);

    SvFrame tagged = reference_sv_frame();
    tagged.vlan = VlanTag{4, 100};
    CHECK(classify_frame(encode_sv(tagged)) == FrameKind::Sv);
}

TEST_CASE("VLAN tag is preserved through a round-trip") {
    SvFrame f = reference_sv_frame();
    f.vlan = VlanTag{7, 3501};
    Bytes b = encode_sv(f);
    CHECK(b[12] == 0x81);
    CHECK(b[13] == 0x00);
    CHECK(decode_sv(b) == f);

    GooseFrame g = reference_goose_frame();
    g.vlan = VlanTag{0, 1};
    CHECK(decode_goose(encode_goose(g)) == g);
}

TEST_CASE("long identifiers exercise multi-byte TLV lengths") {
    GooseFrame f = reference_goose_frame();
    f.goId = std::string(129, 'x');
    f.datSet = std::string(120, 'y');
    f.allData.assign(100, true);
    Bytes b = encode_goose(f);
    CHECK(decode_goose(b) == f);
    CHECK(encode_goose(decode_goose(b)) == b);
}

TEST_CASE("pseudo-random SV corpus round-trips exactly") {
    SplitMix64 rng(0xC0DEC5EEDULL);
    for (int i = 0; i < 1000; ++i) {
        SvFrame f = gen::sv_frame(rng);
        Bytes b = encode_sv(f);
        SvFrame d = decode_sv(b);
        REQUIRE(d == f);
        REQUIRE(encode_sv(d) == b);
    }
}

TEST_CASE("pseudo-random GOOSE corpus round-trips exactly") {
    SplitMix64 rng(0x6005E5EEDULL);
    for (int i = 0; i < 1000; ++i) {
        GooseFrame f = gen::goose_frame(rng);
        Bytes b = encode_goose(f);
        GooseFrame d = decode_goose(b);
        REQUIRE(d == f);
        REQUIRE(encode_goose(d) == b);
    }
}

TEST_CASE("encoding is canonical: same frame, same bytes") {
    SplitMix64 rng(7);
    for (int i = 0; i < 50; ++i) {
        SvFrame f = gen::sv_frame(rng);
        CHECK(encode_sv(f) == encode_sv(f));
        GooseFrame g = gen::goose_frame(rng);
        CHECK(encode_goose(g) == encode_goose(g));
    }
}

TEST_CASE("decoder is total over random and mutated inputs") {
    SplitMix64 rng(0xF0221);
    for (int i = 0; i < 2000; ++i) {
        Bytes junk(rng.next_below(200), 0);
        for (auto& x : junk) x = static_cast<std::uint8_t>(rng.next_below(256));
        try {
            (void)decode_sv(junk);
        } catch (const CodecError&) {
        }
        try {
            (void)decode_goose(junk);
        } catch (const CodecError&) {
        }
        (void)classify_frame(junk);
    }
    // single-byte mutations of valid frames
    for (int i = 0; i < 500; ++i) {
        Bytes b = i % 2 == 0 ? encode_sv(gen::sv_frame(rng)) : encode_goose(gen::goose_frame(rng));
        b[rng.next_below(b.size())] ^= static_cast<std::uint8_t>(1 + rng.next_below(255));
        try {
            (void)decode_sv(b);
        } catch (const CodecError&) {
        }
        try {
            (void)decode_goose(b);
        } catch (const CodecError&) {
        }
    }
}
