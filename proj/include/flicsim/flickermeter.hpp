// Software flickermeter for the 230 V / 50 Hz reference lamp.
//
// Block 1  self-normalization of the input voltage to unit rms
// Block 2  squaring demodulator
// Block 3  0.05 Hz high-pass, 35 Hz 6th-order Butterworth low-pass, and
//          the lamp-eye-brain weighting band-pass peaking near 8.8 Hz
// Block 4  squaring plus 300 ms sliding mean, scaled to perceptibility
//          units (P_inst = 1 at the threshold of perception)
// Block 5  percentile classifier producing the short-term severity Pst
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flicsim/iir.hpp"
#include "flicsim/signal.hpp"

namespace flicsim {

/// Pst values below this are dominated by implementation residue; real
/// instruments disagree with software here, so results carry a flag.
inline constexpr double kPstFloor = 0.05;

/// Reference-lamp weighting constants (230 V, 50 Hz incandescent).
struct WeightingConstants {
    double k = 1.74802;
    double lambda = kTwoPi * 4.05981;
    double omega1 = kTwoPi * 9.15494;
    double omega2 = kTwoPi * 2.27979;
    double omega3 = kTwoPi * 1.22535;
    double omega4 = kTwoPi * 21.9;
};

/// Scales block 4 output so that sinusoidal modulation at 8.8 Hz with
/// dU/U = 0.25 % (the reference perceptibility threshold) peaks at
/// P_inst = 1: the reciprocal of the full-rate block 4 maximum for that
/// signal at the default 20 kHz meter rate, 30 s settle, 30 s window.
/// Regenerated by tools/calibrate.cpp and guarded by a conformance test.
inline constexpr double kBlock4Calibration = 3.094691595685589e+05;

enum class LampReference { Lamp230V50Hz };

struct FlickermeterConfig {
    LampReference lamp = LampReference::Lamp230V50Hz;
    double input_rate_hz = 20000.0;
    double classifier_rate_hz = 500.0;
    double window_s = 600.0;
    double settle_s = 30.0;
    double normalization_tau_s = 60.0;
    WeightingConstants weighting{};

    void validate() const {
        if (!(input_rate_hz >= 2000.0))
            throw std::invalid_argument("flickermeter input rate must be >= 2 kHz, got " +
                                        std::to_string(input_rate_hz));
        if (!(classifier_rate_hz >= 50.0))
            throw std::invalid_argument("classifier rate must be >= 50 Hz, got " +
                                        std::to_string(classifier_rate_hz));
        if (!(window_s > 0.0)) throw std::invalid_argument("observation window must be > 0 s");
        if (settle_s < 0.0) throw std::invalid_argument("settle time must be >= 0 s");
        if (!(normalization_tau_s > 0.0))
            throw std::invalid_argument("normalization time constant must be > 0 s");
        const double ratio = input_rate_hz / classifier_rate_hz;
        if (std::abs(ratio - std::round(ratio)) > 1e-9)
            throw std::invalid_argument("input rate must be an integer multiple of the "
                                        "classifier rate");
    }
};

/// First-order low-pass 1/(1 + tau s).
[[nodiscard]] inline Biquad design_lowpass1(double tau_s, double sample_rate) {
    const double fc = 1.0 / (kTwoPi * tau_s);
    return bilinear(AnalogSection{0.0, 0.0, 1.0, 0.0, tau_s, 1.0}, sample_rate, fc);
}

/// Analog section together with the frequency at which its bilinear
/// discretization is prewarped.
struct PrototypeSection {
    AnalogSection analog;
    double prewarp_hz;
};

/// Analog prototype of the block 3 chain: 0.05 Hz high-pass, 6th-order
/// Butterworth low-pass at 35 Hz, then the lamp-eye-brain weighting
/// band-pass realized as two sections.
[[nodiscard]] inline std::vector<PrototypeSection> weighting_prototype(
    const WeightingConstants& wc = {}) {
    std::vector<PrototypeSection> proto;

    const double hp_hz = 0.05;
    proto.push_back({AnalogSection{0.0, 1.0, 0.0, 0.0, 1.0, kTwoPi * hp_hz}, hp_hz});

    const double lp_hz = 35.0;
    const double wlp = kTwoPi * lp_hz;
    for (double q : {0.5176380902050415, 0.7071067811865476, 1.9318516525781366})
        proto.push_back({AnalogSection{0.0, 0.0, wlp * wlp, 1.0, wlp / q, wlp * wlp}, lp_hz});

    // weighting: k w1 s / (s^2 + 2 lambda s + w1^2)
    //          * (s + w2) (w3 w4 / w2) / ((s + w3)(s + w4))
    proto.push_back(
        {AnalogSection{0.0, wc.k * wc.omega1, 0.0, 1.0, 2.0 * wc.lambda, wc.omega1 * wc.omega1},
         wc.omega1 / kTwoPi});
    const double g = wc.omega3 * wc.omega4 / wc.omega2;
    proto.push_back(
        {AnalogSection{0.0, g, g * wc.omega2, 1.0, wc.omega3 + wc.omega4, wc.omega3 * wc.omega4},
         std::sqrt(wc.omega3 * wc.omega4) / kTwoPi});
    return proto;
}

/// Combined analog magnitude response of the block 3 prototype.
[[nodiscard]] inline double weighting_analog_gain(double f_hz, const WeightingConstants& wc = {}) {
    double gain = 1.0;
    for (const PrototypeSection& p : weighting_prototype(wc)) gain *= analog_gain(p.analog, f_hz);
    return gain;
}

/// Block 3 filter cascade: high-pass, Butterworth low-pass, weighting.
[[nodiscard]] inline BiquadCascade build_weighting_cascade(double sample_rate,
                                                           const WeightingConstants& wc = {}) {
    std::vector<Biquad> secs;
    for (const PrototypeSection& p : weighting_prototype(wc))
        secs.push_back(bilinear(p.analog, sample_rate, p.prewarp_hz));
    return BiquadCascade{std::move(secs)};
}

struct Block1State {
    Biquad tracker;          // low-pass on the squared signal
    BiquadState tracker_st;
    bool primed = false;
};

struct FlickermeterState {
    Block1State block1;
    BiquadCascade block3;
    Biquad block4_lp;
    BiquadState block4_st;

    std::vector<double> p_inst;  // classifier store at classifier_rate
};

/// Divide the signal by its tracked rms so rated voltage maps to unit
/// rms. The tracker is a first-order low-pass on the squared signal;
/// it is primed from the first second of data so a steady input sees
/// no artificial turn-on transient.
[[nodiscard]] inline SignalBuffer block1_normalize(SignalBuffer signal, Block1State& state,
                                                   const FlickermeterConfig& config) {
    if (!state.primed) {
        state.tracker = design_lowpass1(config.normalization_tau_s, signal.sample_rate);
        const std::size_t n0 =
            std::min(signal.size(), static_cast<std::size_t>(signal.sample_rate));
        if (n0 == 0) throw std::invalid_argument("block1_normalize: empty signal");
        double ms = 0.0;
        for (std::size_t i = 0; i < n0; ++i) ms += signal.samples[i] * signal.samples[i];
        ms /= static_cast<double>(n0);
        // steady-state preload: a constant input ms stays at output ms
        state.tracker_st.s1 = ms * (1.0 - state.tracker.b0);
        state.tracker_st.s2 = ms * (state.tracker.b2 - state.tracker.a2);
        state.primed = true;
    }
    for (double& v : signal.samples) {
        if (!std::isfinite(v))
            throw std::invalid_argument("block1_normalize: non-finite input sample");
        const double ms = biquad_step(state.tracker, state.tracker_st, v * v);
        v /= std::sqrt(ms);
    }
    return signal;
}

/// Pointwise square.
[[nodiscard]] inline SignalBuffer block2_square(SignalBuffer signal) {
    for (double& v : signal.samples) v *= v;
    return signal;
}

/// Run the demodulated signal through the weighting cascade.
[[nodiscard]] inline SignalBuffer block3_weight(SignalBuffer signal, BiquadCascade& cascade) {
    cascade.process_inplace(signal.samples);
    return signal;
}

/// Square, smooth with the 300 ms low-pass, scale to perceptibility
/// units.
[[nodiscard]] inline SignalBuffer block4_smooth(SignalBuffer signal, Biquad& lp, BiquadState& st,
                                                double calibration = kBlock4Calibration) {
    for (double& v : signal.samples)
        v = calibration * biquad_step(lp, st, v * v);
    return signal;
}

/// Level exceeded by `percent` % of the samples; `sorted_desc` must be
/// sorted descending.
[[nodiscard]] inline double percentile_exceeded(std::span<const double> sorted_desc,
                                                double percent) {
    if (sorted_desc.empty()) throw std::invalid_argument("percentile of empty sample set");
    const double target = percent * static_cast<double>(sorted_desc.size()) / 100.0;
    auto idx = static_cast<std::size_t>(std::llround(target));
    idx = std::min(idx, sorted_desc.size() - 1);
    return sorted_desc[idx];
}

/// Pst from P_inst samples: exact order statistics, the standard
/// percentile smoothing, and the five-term severity formula.
[[nodiscard]] inline double block5_classify(std::span<const double> p_inst_samples) {
    if (p_inst_samples.size() < 2)
        throw std::invalid_argument("block5_classify: needs at least 2 P_inst samples, got " +
                                    std::to_string(p_inst_samples.size()));

    std::vector<double> sorted(p_inst_samples.begin(), p_inst_samples.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const std::span<const double> d{sorted};

    const auto p = [&](double k) { return percentile_exceeded(d, k); };
    const double p0_1 = p(0.1);
    const double p1s = (p(0.7) + p(1.0) + p(1.5)) / 3.0;
    const double p3s = (p(2.2) + p(3.0) + p(4.0)) / 3.0;
    const double p10s = (p(6.0) + p(8.0) + p(10.0) + p(13.0) + p(17.0)) / 5.0;
    const double p50s = (p(30.0) + p(50.0) + p(80.0)) / 3.0;

    return std::sqrt(0.0314 * p0_1 + 0.0525 * p1s + 0.0657 * p3s + 0.28 * p10s + 0.08 * p50s);
}

/// Instantaneous flicker sensation of a voltage waveform, sampled at
/// classifier rate. Runs blocks 1-4 over the whole signal.
[[nodiscard]] inline SignalBuffer p_inst_trace(const SignalBuffer& signal,
                                               const FlickermeterConfig& config,
                                               double calibration = kBlock4Calibration) {
    config.validate();
    if (signal.sample_rate != config.input_rate_hz)
        throw std::invalid_argument("flickermeter: signal rate " +
                                    std::to_string(signal.sample_rate) +
                                    " Hz does not match configured input rate " +
                                    std::to_string(config.input_rate_hz) + " Hz");

    FlickermeterState st;
    st.block3 = build_weighting_cascade(config.input_rate_hz, config.weighting);
    st.block4_lp = design_lowpass1(0.3, config.input_rate_hz);

    SignalBuffer work = signal;
    work = block1_normalize(std::move(work), st.block1, config);
    work = block2_square(std::move(work));
    work = block3_weight(std::move(work), st.block3);
    work = block4_smooth(std::move(work), st.block4_lp, st.block4_st, calibration);

    const auto stride =
        static_cast<std::size_t>(std::llround(config.input_rate_hz / config.classifier_rate_hz));
    SignalBuffer trace;
    trace.sample_rate = config.classifier_rate_hz;
    trace.t0 = work.t0;
    trace.samples.reserve(work.size() / stride + 1);
    for (std::size_t i = 0; i < work.size(); i += stride) trace.samples.push_back(work.samples[i]);
    return trace;
}

/// Short-term flicker severity of the window following the settling
/// prefix. The signal must cover settle_s + window_s.
[[nodiscard]] inline double measure_pst(const SignalBuffer& signal,
                                        const FlickermeterConfig& config) {
    config.validate();
    const double needed = config.settle_s + config.window_s;
    if (signal.duration() + 1e-9 < needed)
        throw std::invalid_argument("measure_pst: signal covers " +
                                    std::to_string(signal.duration()) + " s but settle+window is " +
                                    std::to_string(needed) + " s");

    const SignalBuffer trace = p_inst_trace(signal, config);
    const auto i0 = static_cast<std::size_t>(std::llround(config.settle_s *
                                                          config.classifier_rate_hz));
    const auto count = static_cast<std::size_t>(std::llround(config.window_s *
                                                             config.classifier_rate_hz));
    if (i0 + count > trace.size())
        throw std::invalid_argument("measure_pst: classifier store shorter than settle+window");
    return block5_classify(std::span<const double>{trace.samples}.subspan(i0, count));
}

[[nodiscard]] inline bool below_instrument_floor(double pst) { return pst < kPstFloor; }

}  // namespace flicsim
