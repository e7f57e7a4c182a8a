#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "testbed/bytes.hpp"
#include "testbed/frames.hpp"

namespace testbed {

// Typed codec failure. Encoding failures name the offending field; decoding
// failures additionally carry the byte offset where parsing stopped.
class CodecError : public std::runtime_error {
public:
    enum class Kind {
        Invariant,      // frame violates a type invariant
        WrongEthertype,
        Truncated,      // declared length exceeds remaining bytes
        LengthMismatch, // wire Length field or container length is inconsistent
        BadTag,         // unexpected or unknown TLV tag
        BadValue,       // field value out of range
    };

    CodecError(Kind kind, std::string field, std::size_t offset, const std::string& message)
        : std::runtime_error(message + " (field '" + field + "', offset " + std::to_string(offset) + ")"),
          kind_(kind), field_(std::move(field)), offset_(offset) {}

    Kind kind() const { return kind_; }
    const std::string& field() const { return field_; }
    std::size_t offset() const { return offset_; }

private:
    Kind kind_;
    std::string field_;
    std::size_t offset_;
};

namespace codec_detail {

inline void require_ascii(const std::string& field, const std::string& s, std::size_t maxLen) {
    if (s.empty())
        throw CodecError(CodecError::Kind::Invariant, field, 0, "string must be nonempty");
    if (s.size() > maxLen)
        throw CodecError(CodecError::Kind::Invariant, field, 0,
                         "string longer than " + std::to_string(maxLen) + " chars");
    for (char c : s) {
        if (c < 0x20 || c > 0x7E)
            throw CodecError(CodecError::Kind::Invariant, field, 0, "string must be printable ASCII");
    }
}

inline void put_tlv_header(Bytes& out, std::uint8_t tag, std::size_t len) {
    out.push_back(tag);
    if (len < 128) {
        out.push_back(static_cast<std::uint8_t>(len));
    } else if (len <= 255) {
        out.push_back(0x81);
        out.push_back(static_cast<std::uint8_t>(len));
    } else if (len <= 65535) {
        out.push_back(0x82);
        out.push_back(static_cast<std::uint8_t>(len >> 8));
        out.push_back(static_cast<std::uint8_t>(len));
    } else {
        throw CodecError(CodecError::Kind::Invariant, "tlv", 0, "value too long for TLV encoding");
    }
}

inline void put_tlv(Bytes& out, std::uint8_t tag, const Bytes& value) {
    put_tlv_header(out, tag, value.size());
    out.insert(out.end(), value.begin(), value.end());
}

inline void put_tlv_string(Bytes& out, std::uint8_t tag, const std::string& s) {
    put_tlv_header(out, tag, s.size());
    out.insert(out.end(), s.begin(), s.end());
}

inline void put_tlv_u8(Bytes& out, std::uint8_t tag, std::uint8_t v) {
    put_tlv_header(out, tag, 1);
    out.push_back(v);
}

inline void put_tlv_u16(Bytes& out, std::uint8_t tag, std::uint16_t v) {
    put_tlv_header(out, tag, 2);
    put_u16(out, v);
}

inline void put_tlv_u32(Bytes& out, std::uint8_t tag, std::uint32_t v) {
    put_tlv_header(out, tag, 4);
    put_u32(out, v);
}

inline void put_ethernet_header(Bytes& out, const MacAddress& dst, const MacAddress& src,
                                const std::optional<VlanTag>& vlan, std::uint16_t ethertype,
                                std::uint16_t appId, std::size_t apduLen) {
    out.insert(out.end(), dst.octets.begin(), dst.octets.end());
    out.insert(out.end(), src.octets.begin(), src.octets.end());
    if (vlan) {
        if (vlan->id >= 4096)
            throw CodecError(CodecError::Kind::Invariant, "vlan.id", 0, "VLAN id must be < 4096");
        if (vlan->priority >= 8)
            throw CodecError(CodecError::Kind::Invariant, "vlan.priority", 0, "VLAN priority must be < 8");
        put_u16(out, kEthertypeVlan);
        put_u16(out, static_cast<std::uint16_t>((vlan->priority << 13) | vlan->id));
    }
    put_u16(out, ethertype);
    put_u16(out, appId);
    put_u16(out, static_cast<std::uint16_t>(8 + apduLen)); // Length covers APPID..end of APDU
    put_u16(out, 0x0000);                                  // Reserved1
    put_u16(out, 0x0000);                                  // Reserved2
}

// Bounds-checked big-endian reader over an immutable byte sequence.
class Reader {
public:
    Reader(const Bytes& bytes, std::size_t pos, std::size_t end) : b_(bytes), pos_(pos), end_(end) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return end_ - pos_; }

    void need(std::size_t n, const char* field) const {
        if (pos_ + n > end_)
            throw CodecError(CodecError::Kind::Truncated, field, pos_, "input truncated");
    }

    std::uint8_t u8(const char* field) {
        need(1, field);
        return b_[pos_++];
    }

    std::uint16_t u16(const char* field) {
        need(2, field);
        std::uint16_t v = static_cast<std::uint16_t>((b_[pos_] << 8) | b_[pos_ + 1]);
        pos_ += 2;
        return v;
    }

    std::uint32_t u24(const char* field) {
        need(3, field);
        std::uint32_t v = (static_cast<std::uint32_t>(b_[pos_]) << 16) |
                          (static_cast<std::uint32_t>(b_[pos_ + 1]) << 8) | b_[pos_ + 2];
        pos_ += 3;
        return v;
    }

    std::uint32_t u32(const char* field) {
        need(4, field);
        std::uint32_t v = (static_cast<std::uint32_t>(b_[pos_]) << 24) |
                          (static_cast<std::uint32_t>(b_[pos_ + 1]) << 16) |
                          (static_cast<std::uint32_t>(b_[pos_ + 2]) << 8) | b_[pos_ + 3];
        pos_ += 4;
        return v;
    }

    std::string str(std::size_t n, const char* field) {
        need(n, field);
        std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    MacAddress mac(const char* field) {
        need(6, field);
        MacAddress m;
        for (int i = 0; i < 6; ++i) m.octets[static_cast<std::size_t>(i)] = b_[pos_ + static_cast<std::size_t>(i)];
        pos_ += 6;
        return m;
    }

    // Reads a TLV header; the tag must match. Returns value length and leaves
    // the cursor at the first value byte.
    std::size_t tlv(std::uint8_t expectedTag, const char* field) {
        std::size_t tagOffset = pos_;
        std::uint8_t tag = u8(field);
        if (tag != expectedTag)
            throw CodecError(CodecError::Kind::BadTag, field, tagOffset,
                             "unexpected TLV tag 0x" + to_hex({&tag, 1}));
        std::uint8_t l0 = u8(field);
        std::size_t len;
        if (l0 < 0x80) {
            len = l0;
        } else if (l0 == 0x81) {
            len = u8(field);
        } else if (l0 == 0x82) {
            len = u16(field);
        } else {
            throw CodecError(CodecError::Kind::LengthMismatch, field, pos_ - 1,
                             "unsupported TLV length form");
        }
        if (pos_ + len > end_)
            throw CodecError(CodecError::Kind::Truncated, field, tagOffset,
                             "TLV declared length exceeds remaining bytes");
        return len;
    }

    std::size_t tlv_exact(std::uint8_t expectedTag, std::size_t exactLen, const char* field) {
        std::size_t tagOffset = pos_;
        std::size_t len = tlv(expectedTag, field);
        if (len != exactLen)
            throw CodecError(CodecError::Kind::LengthMismatch, field, tagOffset,
                             "TLV length must be " + std::to_string(exactLen) + " bytes, got " +
                                 std::to_string(len));
        return len;
    }

    // Creates a sub-reader spanning [pos, pos+len) and advances past it.
    Reader sub(std::size_t len) {
        Reader r(b_, pos_, pos_ + len);
        pos_ += len;
        return r;
    }

    void expect_exhausted(const char* field) const {
        if (pos_ != end_)
            throw CodecError(CodecError::Kind::LengthMismatch, field, pos_,
                             "trailing bytes inside container");
    }

private:
    const Bytes& b_;
    std::size_t pos_;
    std::size_t end_;
};

inline std::string decoded_ascii(Reader& r, std::size_t len, const char* field, std::size_t maxLen) {
    std::size_t at = r.pos();
    std::string s = r.str(len, field);
    if (s.empty())
        throw CodecError(CodecError::Kind::BadValue, field, at, "string must be nonempty");
    if (s.size() > maxLen)
        throw CodecError(CodecError::Kind::BadValue, field, at, "string too long");
    for (char c : s)
        if (c < 0x20 || c > 0x7E)
            throw CodecError(CodecError::Kind::BadValue, field, at, "string must be printable ASCII");
    return s;
}

struct EthernetHeader {
    MacAddress dst;
    MacAddress src;
    std::optional<VlanTag> vlan;
    std::uint16_t ethertype = 0;
    std::uint16_t appId = 0;
    std::size_t apduStart = 0;
};

inline EthernetHeader decode_ethernet(Reader& r, std::uint16_t wantEthertype, std::size_t totalSize) {
    EthernetHeader h;
    h.dst = r.mac("dst");
    h.src = r.mac("src");
    std::size_t etOffset = r.pos();
    std::uint16_t et = r.u16("ethertype");
    if (et == kEthertypeVlan) {
        std::uint16_t tci = r.u16("vlan");
        h.vlan = VlanTag{static_cast<std::uint8_t>(tci >> 13), static_cast<std::uint16_t>(tci & 0x0FFF)};
        etOffset = r.pos();
        et = r.u16("ethertype");
    }
    if (et != wantEthertype) {
        std::uint8_t raw[2] = {static_cast<std::uint8_t>(et >> 8), static_cast<std::uint8_t>(et)};
        throw CodecError(CodecError::Kind::WrongEthertype, "ethertype", etOffset,
                         "wrong ethertype 0x" + to_hex(raw));
    }
    h.ethertype = et;
    h.appId = r.u16("appId");
    std::size_t lenOffset = r.pos();
    std::uint16_t length = r.u16("length");
    r.u16("reserved1");
    r.u16("reserved2");
    h.apduStart = r.pos();
    std::size_t apduLen = totalSize - h.apduStart;
    if (length != 8 + apduLen)
        throw CodecError(CodecError::Kind::LengthMismatch, "length", lenOffset,
                         "Length field must equal 8 + APDU length");
    return h;
}

} // namespace codec_detail

inline void validate(const SvFrame& f) {
    using codec_detail::require_ascii;
    require_ascii("svId", f.svId, 64);
    if (f.smpCnt > 4799)
        throw CodecError(CodecError::Kind::Invariant, "smpCnt", 0, "smpCnt must be in [0, 4799]");
}

inline void validate(const GooseFrame& f) {
    using codec_detail::require_ascii;
    require_ascii("gocbRef", f.gocbRef, 129);
    require_ascii("datSet", f.datSet, 129);
    require_ascii("goId", f.goId, 129);
    if (f.stNum == 0)
        throw CodecError(CodecError::Kind::Invariant, "stNum", 0, "stNum must be >= 1");
    if (f.allData.empty())
        throw CodecError(CodecError::Kind::Invariant, "allData", 0, "allData must be nonempty");
    if (f.t.fraction >= (1U << 24))
        throw CodecError(CodecError::Kind::Invariant, "t.fraction", 0, "fraction must be < 2^24");
}

inline Bytes encode_sv(const SvFrame& f) {
    using namespace codec_detail;
    validate(f);

    Bytes seq; // 0x30 contents
    put_tlv_string(seq, 0x80, f.svId);
    put_tlv_u16(seq, 0x82, f.smpCnt);
    put_tlv_u32(seq, 0x83, f.confRev);
    put_tlv_u8(seq, 0x85, f.smpSynch);
    Bytes samples;
    samples.reserve(64);
    for (const SvSample& s : f.samples) {
        put_i32(samples, s.value);
        put_u32(samples, s.quality);
    }
    put_tlv(seq, 0x87, samples);

    Bytes asdu;
    put_tlv(asdu, 0x30, seq);
    Bytes body;
    put_tlv_u8(body, 0x80, 1); // noASDU
    put_tlv(body, 0xA2, asdu);
    Bytes apdu;
    put_tlv(apdu, 0x60, body);

    Bytes out;
    out.reserve(26 + apdu.size());
    put_ethernet_header(out, f.dst, f.src, f.vlan, kEthertypeSv, f.appId, apdu.size());
    out.insert(out.end(), apdu.begin(), apdu.end());
    return out;
}

inline SvFrame decode_sv(const Bytes& bytes) {
    using namespace codec_detail;
    Reader r(bytes, 0, bytes.size());
    EthernetHeader h = decode_ethernet(r, kEthertypeSv, bytes.size());

    SvFrame f;
    f.dst = h.dst;
    f.src = h.src;
    f.vlan = h.vlan;
    f.appId = h.appId;

    std::size_t apduLen = r.tlv(0x60, "savPdu");
    Reader apdu = r.sub(apduLen);
    r.expect_exhausted("savPdu");

    std::size_t noAsduAt = apdu.pos();
    apdu.tlv_exact(0x80, 1, "noASDU");
    if (apdu.u8("noASDU") != 1)
        throw CodecError(CodecError::Kind::BadValue, "noASDU", noAsduAt, "exactly one ASDU supported");

    Reader seqAsdu = apdu.sub(apdu.tlv(0xA2, "seqASDU"));
    apdu.expect_exhausted("savPdu");
    Reader asdu = seqAsdu.sub(seqAsdu.tlv(0x30, "ASDU"));
    seqAsdu.expect_exhausted("seqASDU");

    f.svId = decoded_ascii(asdu, asdu.tlv(0x80, "svId"), "svId", 64);
    std::size_t smpCntAt = asdu.pos();
    asdu.tlv_exact(0x82, 2, "smpCnt");
    f.smpCnt = asdu.u16("smpCnt");
    if (f.smpCnt > 4799)
        throw CodecError(CodecError::Kind::BadValue, "smpCnt", smpCntAt, "smpCnt must be in [0, 4799]");
    asdu.tlv_exact(0x83, 4, "confRev");
    f.confRev = asdu.u32("confRev");
    asdu.tlv_exact(0x85, 1, "smpSynch");
    f.smpSynch = asdu.u8("smpSynch");
    std::size_t samplesAt = asdu.pos();
    std::size_t samplesLen = asdu.tlv(0x87, "samples");
    if (samplesLen != 64)
        throw CodecError(CodecError::Kind::LengthMismatch, "samples", samplesAt,
                         "samples field must be exactly 64 bytes");
    for (SvSample& s : f.samples) {
        s.value = static_cast<std::int32_t>(asdu.u32("samples"));
        s.quality = asdu.u32("samples");
    }
    asdu.expect_exhausted("ASDU");
    return f;
}

inline Bytes encode_goose(const GooseFrame& f) {
    using namespace codec_detail;
    validate(f);

    Bytes t;
    put_u32(t, f.t.seconds);
    put_u24(t, f.t.fraction);
    put_u8(t, f.t.quality);

    Bytes allData;
    for (bool b : f.allData) put_tlv_u8(allData, 0x83, b ? 1 : 0);

    Bytes body;
    put_tlv_string(body, 0x80, f.gocbRef);
    put_tlv_u32(body, 0x81, f.timeAllowedToLiveMs);
    put_tlv_string(body, 0x82, f.datSet);
    put_tlv_string(body, 0x83, f.goId);
    put_tlv(body, 0x84, t);
    put_tlv_u32(body, 0x85, f.stNum);
    put_tlv_u32(body, 0x86, f.sqNum);
    put_tlv_u8(body, 0x87, f.simulation ? 1 : 0);
    put_tlv_u32(body, 0x88, f.confRev);
    put_tlv_u8(body, 0x89, f.ndsCom ? 1 : 0);
    put_tlv_u32(body, 0x8A, static_cast<std::uint32_t>(f.allData.size()));
    put_tlv(body, 0xAB, allData);

    Bytes apdu;
    put_tlv(apdu, 0x61, body);

    Bytes out;
    out.reserve(26 + apdu.size());
    put_ethernet_header(out, f.dst, f.src, f.vlan, kEthertypeGoose, f.appId, apdu.size());
    out.insert(out.end(), apdu.begin(), apdu.end());
    return out;
}

inline GooseFrame decode_goose(const Bytes& bytes) {
    using namespace codec_detail;
    Reader r(bytes, 0, bytes.size());
    EthernetHeader h = decode_ethernet(r, kEthertypeGoose, bytes.size());

    GooseFrame f;
    f.dst = h.dst;
    f.src = h.src;
    f.vlan = h.vlan;
    f.appId = h.appId;

    Reader pdu = r.sub(r.tlv(0x61, "goosePdu"));
    r.expect_exhausted("goosePdu");

    f.gocbRef = decoded_ascii(pdu, pdu.tlv(0x80, "gocbRef"), "gocbRef", 129);
    pdu.tlv_exact(0x81, 4, "timeAllowedToLive");
    f.timeAllowedToLiveMs = pdu.u32("timeAllowedToLive");
    f.datSet = decoded_ascii(pdu, pdu.tlv(0x82, "datSet"), "datSet", 129);
    f.goId = decoded_ascii(pdu, pdu.tlv(0x83, "goId"), "goId", 129);
    pdu.tlv_exact(0x84, 8, "t");
    f.t.seconds = pdu.u32("t");
    f.t.fraction = pdu.u24("t");
    f.t.quality = pdu.u8("t");
    std::size_t stNumAt = pdu.pos();
    pdu.tlv_exact(0x85, 4, "stNum");
    f.stNum = pdu.u32("stNum");
    if (f.stNum == 0)
        throw CodecError(CodecError::Kind::BadValue, "stNum", stNumAt, "stNum must be >= 1");
    pdu.tlv_exact(0x86, 4, "sqNum");
    f.sqNum = pdu.u32("sqNum");
    pdu.tlv_exact(0x87, 1, "simulation");
    f.simulation = pdu.u8("simulation") != 0;
    pdu.tlv_exact(0x88, 4, "confRev");
    f.confRev = pdu.u32("confRev");
    pdu.tlv_exact(0x89, 1, "ndsCom");
    f.ndsCom = pdu.u8("ndsCom") != 0;
    std::size_t numAt = pdu.pos();
    pdu.tlv_exact(0x8A, 4, "numDatSetEntries");
    std::uint32_t numEntries = pdu.u32("numDatSetEntries");

    Reader entries = pdu.sub(pdu.tlv(0xAB, "allData"));
    pdu.expect_exhausted("goosePdu");
    while (entries.remaining() > 0) {
        std::size_t at = entries.pos();
        entries.tlv_exact(0x83, 1, "allData");
        std::uint8_t v = entries.u8("allData");
        if (v > 1)
            throw CodecError(CodecError::Kind::BadValue, "allData", at, "boolean must be 0 or 1");
        f.allData.push_back(v != 0);
    }
    if (f.allData.size() != numEntries)
        throw CodecError(CodecError::Kind::LengthMismatch, "numDatSetEntries", numAt,
                         "numDatSetEntries does not match number of allData entries");
    if (f.allData.empty())
        throw CodecError(CodecError::Kind::BadValue, "allData", numAt, "allData must be nonempty");
    return f;
}

// Ethertype-based classification after an optional VLAN tag. Total: any input
// that is not a well-formed SV/GOOSE header classifies as Other.
inline FrameKind classify_frame(const Bytes& bytes) {
    std::size_t etOffset = 12;
    if (bytes.size() < etOffset + 2) return FrameKind::Other;
    std::uint16_t et = static_cast<std::uint16_t>((bytes[etOffset] << 8) | bytes[etOffset + 1]);
    if (et == kEthertypeVlan) {
        etOffset = 16;
        if (bytes.size() < etOffset + 2) return FrameKind::Other;
        et = static_cast<std::uint16_t>((bytes[etOffset] << 8) | bytes[etOffset + 1]);
    }
    if (et == kEthertypeSv) return FrameKind::Sv;
    if (et == kEthertypeGoose) return FrameKind::Goose;
    return FrameKind::Other;
}

// Destination MAC of a raw frame, if long enough to have one.
inline std::optional<MacAddress> frame_dst(const Bytes& bytes) {
    if (bytes.size() < 6) return std::nullopt;
    MacAddress m;
    for (int i = 0; i < 6; ++i) m.octets[static_cast<std::size_t>(i)] = bytes[static_cast<std::size_t>(i)];
    return m;
}

} // namespace testbed
