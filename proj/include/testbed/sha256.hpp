#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>

#include "testbed/bytes.hpp"

namespace testbed {

// Minimal SHA-256 used to fingerprint captures and reports.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset() {
        h_ = {0x6A09E667u, 0xBB67AE85u, 0x3C6EF372u, 0xA54FF53Au,
              0x510E527Fu, 0x9B05688Cu, 0x1F83D9ABu, 0x5BE0CD19u};
        total_ = 0;
        bufLen_ = 0;
    }

    void update(std::span<const std::uint8_t> data) {
        total_ += data.size();
        for (std::uint8_t b : data) {
            buf_[bufLen_++] = b;
            if (bufLen_ == 64) {
                compress();
                bufLen_ = 0;
            }
        }
    }

    std::array<std::uint8_t, 32> digest() {
        std::uint64_t bits = total_ * 8;
        std::uint8_t pad = 0x80;
        update({&pad, 1});
        std::uint8_t zero = 0;
        while (bufLen_ != 56) update({&zero, 1});
        for (int i = 7; i >= 0; --i) {
            std::uint8_t b = static_cast<std::uint8_t>(bits >> (i * 8));
            update({&b, 1});
        }
        std::array<std::uint8_t, 32> out{};
        for (int i = 0; i < 8; ++i) {
            out[static_cast<std::size_t>(i * 4)] = static_cast<std::uint8_t>(h_[static_cast<std::size_t>(i)] >> 24);
            out[static_cast<std::size_t>(i * 4 + 1)] = static_cast<std::uint8_t>(h_[static_cast<std::size_t>(i)] >> 16);
            out[static_cast<std::size_t>(i * 4 + 2)] = static_cast<std::uint8_t>(h_[static_cast<std::size_t>(i)] >> 8);
            out[static_cast<std::size_t>(i * 4 + 3)] = static_cast<std::uint8_t>(h_[static_cast<std::size_t>(i)]);
        }
        return out;
    }

private:
    static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void compress() {
        static constexpr std::uint32_t k[64] = {
            0x428A2F98, 0x71374491, 0xB5C0FBCF, 0xE9B5DBA5, 0x3956C25B, 0x59F111F1, 0x923F82A4, 0xAB1C5ED5,
            0xD807AA98, 0x12835B01, 0x243185BE, 0x550C7DC3, 0x72BE5D74, 0x80DEB1FE, 0x9BDC06A7, 0xC19BF174,
            0xE49B69C1, 0xEFBE4786, 0x0FC19DC6, 0x240CA1CC, 0x2DE92C6F, 0x4A7484AA, 0x5CB0A9DC, 0x76F988DA,
            0x983E5152, 0xA831C66D, 0xB00327C8, 0xBF597FC7, 0xC6E00BF3, 0xD5A79147, 0x06CA6351, 0x14292967,
            0x27B70A85, 0x2E1B2138, 0x4D2C6DFC, 0x53380D13, 0x650A7354, 0x766A0ABB, 0x81C2C92E, 0x92722C85,
            0xA2BFE8A1, 0xA81A664B, 0xC24B8B70, 0xC76C51A3, 0xD192E819, 0xD6990624, 0xF40E3585, 0x106AA070,
            0x19A4C116, 0x1E376C08, 0x2748774C, 0x34B0BCB5, 0x391C0CB3, 0x4ED8AA4A, 0x5B9CCA4F, 0x682E6FF3,
            0x748F82EE, 0x78A5636F, 0x84C87814, 0x8CC70208, 0x90BEFFFA, 0xA4506CEB, 0xBEF9A3F7, 0xC67178F2};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i) {
            std::size_t o = static_cast<std::size_t>(i * 4);
            w[i] = (static_cast<std::uint32_t>(buf_[o]) << 24) | (static_cast<std::uint32_t>(buf_[o + 1]) << 16) |
                   (static_cast<std::uint32_t>(buf_[o + 2]) << 8) | buf_[o + 3];
        }
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3];
        std::uint32_t e = h_[4], f = h_[5], g = h_[6], h = h_[7];
        for (int i = 0; i < 64; ++i) {
            std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t t1 = h + s1 + ch + k[i] + w[i];
            std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t t2 = s0 + maj;
            h = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        h_[0] += a;
        h_[1] += b;
        h_[2] += c;
        h_[3] += d;
        h_[4] += e;
        h_[5] += f;
        h_[6] += g;
        h_[7] += h;
    }

    std::array<std::uint32_t, 8> h_{};
    std::uint8_t buf_[64]{};
    std::uint64_t total_ = 0;
    std::size_t bufLen_ = 0;
};

inline std::string sha256_hex(std::span<const std::uint8_t> data) {
    Sha256 s;
    s.update(data);
    auto d = s.digest();
    return to_hex(d);
}

inline std::string sha256_hex(const std::string& text) {
    return sha256_hex(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace testbed
