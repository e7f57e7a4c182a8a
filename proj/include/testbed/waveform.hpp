#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>

#include "testbed/sim_time.hpp"

namespace testbed {

enum class Phase { A, B, C };

inline double phase_angle(Phase p) {
    switch (p) {
        case Phase::A: return 0.0;
        case Phase::B: return -2.0 * std::numbers::pi / 3.0;
        default: return 2.0 * std::numbers::pi / 3.0;
    }
}

struct FeederConfig {
    double frequencyHz = 60.0;
    double samplingRateHz = 4800.0;
    double normalCurrentPeakA = 315.37; // ~223 A RMS
    double nominalVoltagePeakV = 11267.65;

    std::uint64_t samples_per_cycle() const {
        return static_cast<std::uint64_t>(samplingRateHz / frequencyHz + 0.5);
    }

    void validate() const {
        if (samplingRateHz <= 0) throw std::invalid_argument("samplingRateHz must be > 0");
        if (frequencyHz <= 0) throw std::invalid_argument("frequencyHz must be > 0");
        double ratio = samplingRateHz / frequencyHz;
        if (std::abs(ratio - std::round(ratio)) > 1e-9)
            throw std::invalid_argument("samplingRateHz must be an integer multiple of frequencyHz");
    }
};

// Single-line-to-ground fault on one phase: the current amplitude switches to
// faultCurrentPeakA at the first sampling instant at or after inceptionNs.
struct FaultSpec {
    Phase phase = Phase::A;
    SimTime inceptionNs = 0;
    double faultCurrentPeakA = 0;
};

struct BreakerState {
    bool closed = true;
    SimTime lastChangeAt = 0;
};

struct FeederSample {
    double currentA = 0;
    double voltageV = 0;
};

// X[n] = Xpeak * sin(2*pi*f*n/Fs + phi), with the amplitude switched by fault
// and breaker state. Voltage stays at nominal regardless of fault or breaker.
inline FeederSample sample(const FeederConfig& cfg, const std::optional<FaultSpec>& fault,
                           const BreakerState& breaker, std::uint64_t n, Phase phase) {
    const std::uint64_t fs = static_cast<std::uint64_t>(cfg.samplingRateHz);
    const SimTime tn = sample_instant(n, fs);

    double currentPeak = cfg.normalCurrentPeakA;
    if (fault && phase == fault->phase && tn >= fault->inceptionNs) currentPeak = fault->faultCurrentPeakA;
    if (!breaker.closed && tn >= breaker.lastChangeAt) currentPeak = 0.0;

    const double arg = 2.0 * std::numbers::pi * cfg.frequencyHz * static_cast<double>(n) / cfg.samplingRateHz +
                       phase_angle(phase);
    return FeederSample{currentPeak * std::sin(arg), cfg.nominalVoltagePeakV * std::sin(arg)};
}

// Root mean square over exactly one cycle of samples.
inline double rms(std::span<const double> window, std::size_t samplesPerCycle) {
    if (window.size() != samplesPerCycle)
        throw std::invalid_argument("rms: window length must be " + std::to_string(samplesPerCycle) +
                                    " samples, got " + std::to_string(window.size()));
    double sumSq = 0;
    for (double v : window) sumSq += v * v;
    return std::sqrt(sumSq / static_cast<double>(window.size()));
}

// Per-scenario feeder state owned by the event loop.
class Feeder {
public:
    explicit Feeder(FeederConfig cfg, std::optional<FaultSpec> fault = std::nullopt)
        : cfg_(cfg), fault_(fault) {
        cfg_.validate();
        if (fault_ && fault_->faultCurrentPeakA <= cfg_.normalCurrentPeakA)
            throw std::invalid_argument("faultCurrentPeakA must exceed normalCurrentPeakA");
    }

    const FeederConfig& config() const { return cfg_; }
    const std::optional<FaultSpec>& fault() const { return fault_; }
    const BreakerState& breaker() const { return breaker_; }

    FeederSample at(std::uint64_t n, Phase phase) const { return sample(cfg_, fault_, breaker_, n, phase); }

    // Opens the breaker; duplicate commands are ignored. Returns true when the
    // state actually changed.
    bool open_breaker(SimTime at) {
        if (!breaker_.closed) return false;
        breaker_ = BreakerState{false, at};
        return true;
    }

private:
    FeederConfig cfg_;
    std::optional<FaultSpec> fault_;
    BreakerState breaker_;
};

} // namespace testbed
