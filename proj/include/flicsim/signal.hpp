// Test-signal synthesis: clipped-cosine carriers, normalized modulating
// waveforms, and amplitude modulation of the two.
#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flicsim {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniformly sampled real-valued waveform.
struct SignalBuffer {
    std::vector<double> samples;
    double sample_rate = 0.0;  // Hz
    double t0 = 0.0;           // start time, s

    [[nodiscard]] std::size_t size() const { return samples.size(); }
    [[nodiscard]] double duration() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
    [[nodiscard]] double time_at(std::size_t i) const {
        return t0 + static_cast<double>(i) / sample_rate;
    }
};

/// Supply voltage before fluctuations appear: a cosine hard-clipped at
/// +-clip_level of its amplitude, rescaled to the target rms.
struct CarrierSpec {
    double fc_hz = 50.0;
    double urms_v = 230.0;
    double clip_level = 1.0;  // m_c in (0, 1]; 1 = pure sinusoid

    void validate() const {
        if (!(fc_hz > 0.0))
            throw std::invalid_argument("carrier f_c must be > 0 Hz, got " + std::to_string(fc_hz));
        if (!(urms_v > 0.0))
            throw std::invalid_argument("carrier U_c must be > 0 V, got " + std::to_string(urms_v));
        if (!(clip_level > 0.0) || clip_level > 1.0)
            throw std::invalid_argument("m_c must be in (0, 1], got " + std::to_string(clip_level));
    }
};

enum class Shape { Sinusoidal, Triangular, Trapezoidal, Rectangular };

[[nodiscard]] inline std::string_view to_string(Shape s) {
    switch (s) {
        case Shape::Sinusoidal: return "sinusoidal";
        case Shape::Triangular: return "triangular";
        case Shape::Trapezoidal: return "trapezoidal";
        case Shape::Rectangular: return "rectangular";
    }
    throw std::invalid_argument("unknown shape enumerator");
}

/// Short spelling used by the CLI and the results CSV.
[[nodiscard]] inline std::string_view short_name(Shape s) {
    switch (s) {
        case Shape::Sinusoidal: return "sin";
        case Shape::Triangular: return "tri";
        case Shape::Trapezoidal: return "trap";
        case Shape::Rectangular: return "rect";
    }
    throw std::invalid_argument("unknown shape enumerator");
}

/// Accepts both the short CLI spellings (sin/tri/trap/rect) and full names.
[[nodiscard]] inline Shape parse_shape(std::string_view name) {
    if (name == "sin" || name == "sinusoidal") return Shape::Sinusoidal;
    if (name == "tri" || name == "triangular") return Shape::Triangular;
    if (name == "trap" || name == "trapezoidal") return Shape::Trapezoidal;
    if (name == "rect" || name == "rectangular") return Shape::Rectangular;
    throw std::invalid_argument("unknown shape '" + std::string(name) +
                                "' (expected sin|tri|trap|rect)");
}

/// Fluctuation description. The generated waveform is normalized to
/// [-1, +1]; depth_pct is applied later by modulate().
struct ModulatingSpec {
    Shape shape = Shape::Sinusoidal;
    double fm_hz = 8.8;
    double depth_pct = 0.0;  // dU/U in percent
    double phase = 0.0;      // initial phase as a fraction of T_m

    void validate() const {
        if (!(fm_hz > 0.0))
            throw std::invalid_argument("f_m must be > 0 Hz, got " + std::to_string(fm_hz));
        if (depth_pct < 0.0)
            throw std::invalid_argument("depth must be >= 0 %, got " + std::to_string(depth_pct));
    }
};

/// One period of the normalized modulating waveform, phase in [0, 1).
/// All shapes start at the beginning of their rising segment (the
/// rectangle at the start of its high half) and span exactly [-1, +1].
[[nodiscard]] inline double modulating_value(Shape shape, double phase) {
    switch (shape) {
        case Shape::Sinusoidal:
            return std::sin(kTwoPi * phase);
        case Shape::Triangular:
            return phase < 0.5 ? -1.0 + 4.0 * phase : 3.0 - 4.0 * phase;
        case Shape::Trapezoidal:
            // rise 1/4 T, high 1/4 T, fall 1/4 T, low 1/4 T
            if (phase < 0.25) return -1.0 + 8.0 * phase;
            if (phase < 0.50) return 1.0;
            if (phase < 0.75) return 1.0 - 8.0 * (phase - 0.5);
            return -1.0;
        case Shape::Rectangular:
            return phase < 0.5 ? 1.0 : -1.0;
    }
    throw std::invalid_argument("unknown shape enumerator");
}

/// Mean square of the unit cosine hard-clipped at +-m, closed form.
[[nodiscard]] inline double clipped_cosine_mean_square(double m) {
    const double theta = std::acos(m);
    return (2.0 / std::numbers::pi) *
           (m * m * theta + std::numbers::pi / 4.0 - theta / 2.0 -
            m * std::sqrt(1.0 - m * m) / 2.0);
}

namespace detail {

inline void check_sample_rate(double sample_rate, double min_rate, const char* what) {
    if (!(sample_rate >= min_rate))
        throw std::invalid_argument(std::string(what) + ": sample_rate " +
                                    std::to_string(sample_rate) + " Hz below required " +
                                    std::to_string(min_rate) + " Hz");
}

[[nodiscard]] inline std::size_t sample_count(double sample_rate, double duration) {
    if (!(duration > 0.0))
        throw std::invalid_argument("duration must be > 0 s, got " + std::to_string(duration));
    return static_cast<std::size_t>(std::llround(sample_rate * duration));
}

}  // namespace detail

/// Clipped-cosine carrier, rescaled so the buffer rms equals spec.urms_v.
/// For clip_level = 1 this is the plain cosine at rms U_c.
[[nodiscard]] inline SignalBuffer synthesize_carrier(const CarrierSpec& spec, double sample_rate,
                                                     double duration) {
    spec.validate();
    detail::check_sample_rate(sample_rate, 20.0 * spec.fc_hz, "synthesize_carrier");
    if (duration * spec.fc_hz < 1.0)
        throw std::invalid_argument("duration must cover at least one fundamental period");

    SignalBuffer out;
    out.sample_rate = sample_rate;
    out.samples.resize(detail::sample_count(sample_rate, duration));

    const double m = spec.clip_level;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        double v = std::cos(kTwoPi * spec.fc_hz * static_cast<double>(i) / sample_rate);
        if (v > m) v = m;
        if (v < -m) v = -m;
        out.samples[i] = v;
        sum_sq += v * v;
    }
    const double rms = std::sqrt(sum_sq / static_cast<double>(out.samples.size()));
    const double scale = spec.urms_v / rms;
    for (double& v : out.samples) v *= scale;
    return out;
}

/// Normalized modulating waveform u_mod(t) in [-1, +1].
[[nodiscard]] inline SignalBuffer synthesize_modulating(const ModulatingSpec& spec,
                                                        double sample_rate, double duration) {
    spec.validate();
    detail::check_sample_rate(sample_rate, 20.0 * spec.fm_hz, "synthesize_modulating");

    SignalBuffer out;
    out.sample_rate = sample_rate;
    out.samples.resize(detail::sample_count(sample_rate, duration));
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const double cycles = spec.fm_hz * static_cast<double>(i) / sample_rate + spec.phase;
        out.samples[i] = modulating_value(spec.shape, cycles - std::floor(cycles));
    }
    return out;
}

/// u_IN = (1 + depth_pct/200 * u_mod) * u_c, pointwise.
[[nodiscard]] inline SignalBuffer modulate(const SignalBuffer& carrier, const SignalBuffer& mod,
                                           double depth_pct) {
    if (carrier.sample_rate != mod.sample_rate)
        throw std::invalid_argument("modulate: sample rate mismatch (" +
                                    std::to_string(carrier.sample_rate) + " vs " +
                                    std::to_string(mod.sample_rate) + ")");
    if (carrier.size() != mod.size())
        throw std::invalid_argument("modulate: length mismatch (" +
                                    std::to_string(carrier.size()) + " vs " +
                                    std::to_string(mod.size()) + ")");
    if (depth_pct < 0.0 || depth_pct >= 200.0)
        throw std::invalid_argument("depth must be in [0, 200) %, got " +
                                    std::to_string(depth_pct));

    SignalBuffer out;
    out.sample_rate = carrier.sample_rate;
    out.t0 = carrier.t0;
    out.samples.resize(carrier.size());
    const double half = depth_pct / 200.0;
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = (1.0 + half * mod.samples[i]) * carrier.samples[i];
    return out;
}

}  // namespace flicsim
