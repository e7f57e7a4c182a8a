#pragma once

#include <cstdint>

namespace testbed {

// Simulation clock: nanoseconds since scenario start.
using SimTime = std::uint64_t;

inline constexpr SimTime kMicrosecond = 1'000ULL;
inline constexpr SimTime kMillisecond = 1'000'000ULL;
inline constexpr SimTime kSecond = 1'000'000'000ULL;

// Time of sampling instant n at rate fs (samples/s). Exact at whole seconds,
// truncation error < 1 ns in between.
inline SimTime sample_instant(std::uint64_t n, std::uint64_t fs) {
    return (n / fs) * kSecond + (n % fs) * kSecond / fs;
}

// Smallest sample index whose instant is at or after t.
inline std::uint64_t first_sample_at_or_after(SimTime t, std::uint64_t fs) {
    std::uint64_t n = (t / kSecond) * fs + (t % kSecond) * fs / kSecond;
    while (sample_instant(n, fs) < t) ++n;
    while (n > 0 && sample_instant(n - 1, fs) >= t) --n;
    return n;
}

} // namespace testbed
