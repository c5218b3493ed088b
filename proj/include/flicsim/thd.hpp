// Total harmonic distortion from a DFT synchronized to the fundamental.
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "flicsim/signal.hpp"

namespace flicsim {

/// Amplitude of the component at `freq` via a single Goertzel-style DFT
/// bin. Exact (no leakage) when the buffer spans an integer number of
/// periods of `freq`.
[[nodiscard]] inline double harmonic_amplitude(const SignalBuffer& signal, double freq) {
    const double w = kTwoPi * freq / signal.sample_rate;
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < signal.size(); ++i)
        acc += signal.samples[i] * std::polar(1.0, -w * static_cast<double>(i));
    return 2.0 * std::abs(acc) / static_cast<double>(signal.size());
}

/// sqrt(sum_{h=2..n} U_h^2) / U_1 over harmonics of f_c.
[[nodiscard]] inline double thd(const SignalBuffer& signal, double fc_hz, int n_harmonics = 40) {
    if (n_harmonics < 2)
        throw std::invalid_argument("thd: n_harmonics must be >= 2");
    const double periods = signal.duration() * fc_hz;
    if (std::abs(periods - std::round(periods)) > 1e-6 || periods < 0.5)
        throw std::invalid_argument(
            "thd: buffer must span an integer number of fundamental periods, got " +
            std::to_string(periods));
    if (static_cast<double>(n_harmonics) * fc_hz >= signal.sample_rate / 2.0)
        throw std::invalid_argument("thd: harmonic " + std::to_string(n_harmonics) +
                                    " of " + std::to_string(fc_hz) + " Hz is above Nyquist");

    const double u1 = harmonic_amplitude(signal, fc_hz);
    if (u1 <= 0.0)
        throw std::invalid_argument("thd: no fundamental component at " + std::to_string(fc_hz) +
                                    " Hz");
    double sum_sq = 0.0;
    for (int h = 2; h <= n_harmonics; ++h) {
        const double uh = harmonic_amplitude(signal, fc_hz * h);
        sum_sq += uh * uh;
    }
    return std::sqrt(sum_sq) / u1;
}

}  // namespace flicsim
