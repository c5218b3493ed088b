// Second-order IIR sections discretized from analog prototypes by the
// bilinear transform with per-section frequency prewarping.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "flicsim/signal.hpp"

namespace flicsim {

/// Analog section (B2 s^2 + B1 s + B0) / (A2 s^2 + A1 s + A0).
/// First-order sections set the s^2 coefficients to zero.
struct AnalogSection {
    double b2 = 0.0, b1 = 0.0, b0 = 0.0;
    double a2 = 0.0, a1 = 0.0, a0 = 1.0;
};

/// Digital biquad y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2].
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    /// Schur-Cohn condition for both poles strictly inside the unit circle.
    [[nodiscard]] bool is_stable() const {
        return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
    }

    /// Largest pole magnitude.
    [[nodiscard]] double pole_radius() const {
        const double disc = a1 * a1 - 4.0 * a2;
        if (disc >= 0.0) {
            const double r1 = std::abs((-a1 + std::sqrt(disc)) / 2.0);
            const double r2 = std::abs((-a1 - std::sqrt(disc)) / 2.0);
            return std::max(r1, r2);
        }
        return std::sqrt(a2);  // complex pair: |p|^2 = a2
    }

    /// Magnitude response at frequency f for sample rate fs.
    [[nodiscard]] double gain_at(double f, double fs) const {
        const double w = kTwoPi * f / fs;
        const std::complex<double> z1 = std::polar(1.0, -w);
        const std::complex<double> z2 = z1 * z1;
        return std::abs((b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2));
    }
};

struct BiquadState {
    double s1 = 0.0, s2 = 0.0;  // transposed direct form II
};

[[nodiscard]] inline double biquad_step(const Biquad& q, BiquadState& st, double x) {
    const double y = q.b0 * x + st.s1;
    st.s1 = q.b1 * x - q.a1 * y + st.s2;
    st.s2 = q.b2 * x - q.a2 * y;
    return y;
}

/// Magnitude of the analog section at frequency f, evaluated at s = jw.
[[nodiscard]] inline double analog_gain(const AnalogSection& s, double f_hz) {
    const std::complex<double> jw{0.0, kTwoPi * f_hz};
    const std::complex<double> num = s.b2 * jw * jw + s.b1 * jw + s.b0;
    const std::complex<double> den = s.a2 * jw * jw + s.a1 * jw + s.a0;
    return std::abs(num / den);
}

/// Bilinear transform of an analog section, prewarped so the analog and
/// digital responses coincide exactly at prewarp_hz.
[[nodiscard]] inline Biquad bilinear(const AnalogSection& s, double sample_rate,
                                     double prewarp_hz) {
    if (!(prewarp_hz > 0.0) || prewarp_hz >= sample_rate / 2.0)
        throw std::invalid_argument("bilinear: prewarp frequency must be in (0, fs/2)");
    const double wp = kTwoPi * prewarp_hz;
    const double k = wp / std::tan(wp / (2.0 * sample_rate));
    const double k2 = k * k;

    // A first-order analog section maps to a first-order digital filter.
    // Running it through the generic second-order path below would pin a
    // canceling pole/zero pair exactly on the unit circle at z = -1,
    // which the strict stability check rejects.
    if (s.a2 == 0.0 && s.b2 == 0.0) {
        const double a0 = s.a1 * k + s.a0;
        if (a0 == 0.0) throw std::invalid_argument("bilinear: degenerate analog section");
        Biquad q{(s.b1 * k + s.b0) / a0, (s.b0 - s.b1 * k) / a0, 0.0,
                 (s.a0 - s.a1 * k) / a0, 0.0};
        if (!q.is_stable())
            throw std::runtime_error("bilinear: discretized section is unstable (pole radius " +
                                     std::to_string(q.pole_radius()) + ")");
        return q;
    }

    const double b0 = s.b2 * k2 + s.b1 * k + s.b0;
    const double b1 = 2.0 * (s.b0 - s.b2 * k2);
    const double b2 = s.b2 * k2 - s.b1 * k + s.b0;
    const double a0 = s.a2 * k2 + s.a1 * k + s.a0;
    const double a1 = 2.0 * (s.a0 - s.a2 * k2);
    const double a2 = s.a2 * k2 - s.a1 * k + s.a0;
    if (a0 == 0.0) throw std::invalid_argument("bilinear: degenerate analog section");

    Biquad q{b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
    if (!q.is_stable())
        throw std::runtime_error("bilinear: discretized section is unstable (pole radius " +
                                 std::to_string(q.pole_radius()) + ")");
    return q;
}

/// Cascade of biquads with its running state.
struct BiquadCascade {
    std::vector<Biquad> sections;
    std::vector<BiquadState> state;

    explicit BiquadCascade(std::vector<Biquad> secs = {})
        : sections(std::move(secs)), state(sections.size()) {}

    void reset() { state.assign(sections.size(), BiquadState{}); }

    [[nodiscard]] double step(double x) {
        for (std::size_t i = 0; i < sections.size(); ++i) x = biquad_step(sections[i], state[i], x);
        return x;
    }

    void process_inplace(std::span<double> samples) {
        for (double& v : samples) v = step(v);
    }

    [[nodiscard]] double gain_at(double f, double fs) const {
        double g = 1.0;
        for (const Biquad& q : sections) g *= q.gain_at(f, fs);
        return g;
    }

    [[nodiscard]] double max_pole_radius() const {
        double r = 0.0;
        for (const Biquad& q : sections) r = std::max(r, q.pole_radius());
        return r;
    }
};

}  // namespace flicsim
