// Acquisition front end: windowed-sinc low-pass FIR plus integer
// decimation, applied before the flickermeter.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "flicsim/signal.hpp"

namespace flicsim {

/// Linear-phase low-pass FIR. Taps are symmetric and sum to 1.
struct FirFilter {
    std::vector<double> taps;
    int order = 0;
    double cutoff_hz = 0.0;
    double design_rate_hz = 0.0;

    /// Samples at each edge of a filtered buffer still influenced by
    /// zero-padding (half the impulse response).
    [[nodiscard]] std::size_t warmup_samples() const {
        return static_cast<std::size_t>(order) / 2;
    }
};

namespace detail {

[[nodiscard]] inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

}  // namespace detail

/// Hamming-windowed sinc design. The -6 dB point lands on `cutoff_hz`;
/// order must be even so the group delay is an integer sample count.
[[nodiscard]] inline FirFilter design_lowpass_fir(int order, double cutoff_hz,
                                                  double sample_rate) {
    if (order < 2 || order % 2 != 0)
        throw std::invalid_argument("FIR order must be even and >= 2, got " +
                                    std::to_string(order));
    if (!(cutoff_hz > 0.0) || cutoff_hz >= sample_rate / 2.0)
        throw std::invalid_argument("FIR cutoff must be in (0, fs/2), got " +
                                    std::to_string(cutoff_hz) + " Hz at fs " +
                                    std::to_string(sample_rate) + " Hz");

    FirFilter f;
    f.order = order;
    f.cutoff_hz = cutoff_hz;
    f.design_rate_hz = sample_rate;
    f.taps.resize(static_cast<std::size_t>(order) + 1);

    // Compute the left half and mirror it so the taps are bit-exactly
    // symmetric (exact linear phase); rounding in cos/sinc would otherwise
    // leave the two halves a few ulp apart.
    const double fn = 2.0 * cutoff_hz / sample_rate;  // cutoff as fraction of Nyquist
    const double mid = order / 2.0;
    double sum = 0.0;
    for (int n = 0; n <= order / 2; ++n) {
        const double window = 0.54 - 0.46 * std::cos(kTwoPi * n / order);
        const double v = fn * detail::sinc(fn * (n - mid)) * window;
        f.taps[static_cast<std::size_t>(n)] = v;
        f.taps[static_cast<std::size_t>(order - n)] = v;
        sum += (n == order / 2) ? v : 2.0 * v;
    }
    for (double& t : f.taps) t /= sum;  // unity DC gain
    return f;
}

/// Magnitude response at frequency f, evaluated from the taps.
[[nodiscard]] inline double fir_gain_at(const FirFilter& filter, double f_hz) {
    const double w = kTwoPi * f_hz / filter.design_rate_hz;
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < filter.taps.size(); ++k) {
        re += filter.taps[k] * std::cos(w * static_cast<double>(k));
        im -= filter.taps[k] * std::sin(w * static_cast<double>(k));
    }
    return std::hypot(re, im);
}

/// Linear convolution with the group delay compensated away, so the
/// output is time-aligned with the input and has the same length. The
/// first and last warmup_samples() entries see zero-padded history.
[[nodiscard]] inline SignalBuffer apply_fir(const SignalBuffer& signal, const FirFilter& filter) {
    if (signal.sample_rate != filter.design_rate_hz)
        throw std::invalid_argument("apply_fir: signal rate " +
                                    std::to_string(signal.sample_rate) +
                                    " Hz differs from filter design rate " +
                                    std::to_string(filter.design_rate_hz) + " Hz");

    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(signal.size());
    const std::ptrdiff_t taps = static_cast<std::ptrdiff_t>(filter.taps.size());
    const std::ptrdiff_t delay = filter.order / 2;

    SignalBuffer out;
    out.sample_rate = signal.sample_rate;
    out.t0 = signal.t0;
    out.samples.resize(signal.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t base = i + delay;  // y[i] = sum h[k] x[i + delay - k]
        const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, base - n + 1);
        const std::ptrdiff_t k_hi = std::min(taps - 1, base);
        double acc = 0.0;
        for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k)
            acc += filter.taps[static_cast<std::size_t>(k)] *
                   signal.samples[static_cast<std::size_t>(base - k)];
        out.samples[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

/// Keep every factor-th sample. The caller must have band-limited the
/// signal below the new Nyquist first.
[[nodiscard]] inline SignalBuffer decimate(const SignalBuffer& signal, int factor) {
    if (factor < 1) throw std::invalid_argument("decimate: factor must be >= 1");

    SignalBuffer out;
    out.sample_rate = signal.sample_rate / factor;
    out.t0 = signal.t0;
    out.samples.reserve((signal.size() + static_cast<std::size_t>(factor) - 1) /
                        static_cast<std::size_t>(factor));
    for (std::size_t i = 0; i < signal.size(); i += static_cast<std::size_t>(factor))
        out.samples.push_back(signal.samples[i]);
    return out;
}

/// decimate(apply_fir(signal, filter), factor), computing only the kept
/// samples. Bit-identical to the two-step form.
[[nodiscard]] inline SignalBuffer apply_fir_decimating(const SignalBuffer& signal,
                                                       const FirFilter& filter, int factor) {
    if (factor < 1) throw std::invalid_argument("decimate: factor must be >= 1");
    if (signal.sample_rate != filter.design_rate_hz)
        throw std::invalid_argument("apply_fir_decimating: rate mismatch");

    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(signal.size());
    const std::ptrdiff_t taps = static_cast<std::ptrdiff_t>(filter.taps.size());
    const std::ptrdiff_t delay = filter.order / 2;

    SignalBuffer out;
    out.sample_rate = signal.sample_rate / factor;
    out.t0 = signal.t0;
    out.samples.reserve(static_cast<std::size_t>((n + factor - 1) / factor));
    for (std::ptrdiff_t i = 0; i < n; i += factor) {
        const std::ptrdiff_t base = i + delay;
        const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, base - n + 1);
        const std::ptrdiff_t k_hi = std::min(taps - 1, base);
        double acc = 0.0;
        for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k)
            acc += filter.taps[static_cast<std::size_t>(k)] *
                   signal.samples[static_cast<std::size_t>(base - k)];
        out.samples.push_back(acc);
    }
    return out;
}

/// Band-limit + downsample chain ahead of the flickermeter.
struct FrontEndConfig {
    double synthesis_rate_hz = 80000.0;
    int fir_order = 200;
    double fir_cutoff_hz = 8000.0;
    int decimation = 4;

    [[nodiscard]] double meter_rate_hz() const { return synthesis_rate_hz / decimation; }

    void validate() const {
        if (!(synthesis_rate_hz > 0.0))
            throw std::invalid_argument("synthesis rate must be > 0");
        if (fir_order < 2 || fir_order % 2 != 0)
            throw std::invalid_argument("FIR order must be even and >= 2");
        if (!(fir_cutoff_hz > 0.0) || fir_cutoff_hz >= synthesis_rate_hz / 2.0)
            throw std::invalid_argument("FIR cutoff must be in (0, fs/2)");
        if (decimation < 1)
            throw std::invalid_argument("decimation factor must be >= 1");
        if (fir_cutoff_hz >= meter_rate_hz() / 2.0)
            throw std::invalid_argument(
                "decimation factor " + std::to_string(decimation) + " puts the " +
                std::to_string(fir_cutoff_hz) + " Hz pass band above the new Nyquist");
    }
};

/// FIR anti-alias filter then decimation, as one call.
[[nodiscard]] inline SignalBuffer apply_front_end(const SignalBuffer& signal,
                                                  const FrontEndConfig& config) {
    config.validate();
    if (signal.sample_rate != config.synthesis_rate_hz)
        throw std::invalid_argument("apply_front_end: signal is not at the synthesis rate");
    const FirFilter f =
        design_lowpass_fir(config.fir_order, config.fir_cutoff_hz, config.synthesis_rate_hz);
    return apply_fir_decimating(signal, f, config.decimation);
}

}  // namespace flicsim
