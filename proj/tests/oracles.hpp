// Independent reference computations for the test suite. Everything
// here is implemented separately from the library (different
// algorithms where possible) so tests compare two derivations, not a
// function against itself.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracles {

inline constexpr double kPi = std::numbers::pi;

/// Analytic Fourier amplitude of harmonic h for the unit cosine hard
/// clipped at +-m (odd harmonics only; even ones vanish by symmetry).
/// From the piecewise integral over one quarter period:
///   a_h = (4/pi) [ m sin(h th)/h + I_h ],  th = arccos(m),
///   I_h = integral_{th}^{pi/2} cos(t) cos(h t) dt.
[[nodiscard]] inline double clipped_cosine_harmonic(double m, int h) {
    if (h < 1) throw std::invalid_argument("harmonic index must be >= 1");
    if (h % 2 == 0) return 0.0;
    const double th = std::acos(m);
    double integral;
    if (h == 1) {
        integral = kPi / 4.0 - (th / 2.0 + std::sin(2.0 * th) / 4.0);
    } else {
        const auto antiderivative = [h](double t) {
            return 0.5 * (std::sin((h - 1) * t) / (h - 1) + std::sin((h + 1) * t) / (h + 1));
        };
        integral = antiderivative(kPi / 2.0) - antiderivative(th);
    }
    return (4.0 / kPi) * (m * std::sin(h * th) / h + integral);
}

/// THD of the clipped cosine truncated at n_harmonics, from the series.
[[nodiscard]] inline double clipped_cosine_thd(double m, int n_harmonics) {
    const double fundamental = clipped_cosine_harmonic(m, 1);
    double sum_sq = 0.0;
    for (int h = 2; h <= n_harmonics; ++h) {
        const double a = clipped_cosine_harmonic(m, h);
        sum_sq += a * a;
    }
    return std::sqrt(sum_sq) / fundamental;
}

/// THD of the ideal square wave truncated at n_harmonics (amplitudes
/// proportional to 1/h for odd h); n -> infinity gives sqrt(pi^2/8 - 1).
[[nodiscard]] inline double square_thd_partial(int n_harmonics) {
    double sum_sq = 0.0;
    for (int h = 3; h <= n_harmonics; h += 2) sum_sq += 1.0 / (static_cast<double>(h) * h);
    return std::sqrt(sum_sq);
}

/// Mean square of the unit cosine clipped at +-m, by direct quadrature
/// (midpoint rule over a quarter period; independent of the closed
/// form used in the library).
[[nodiscard]] inline double clipped_cosine_mean_square_quadrature(double m, int steps = 200000) {
    double acc = 0.0;
    const double h = (kPi / 2.0) / steps;
    for (int i = 0; i < steps; ++i) {
        const double t = (i + 0.5) * h;
        const double v = std::min(std::cos(t), m);
        acc += v * v;
    }
    return acc * h / (kPi / 2.0);
}

/// Amplitude of the component at frequency f in a uniformly sampled
/// buffer, via direct projection (assumes an integer number of periods).
[[nodiscard]] inline double projected_amplitude(std::span<const double> x, double f_hz,
                                                double sample_rate) {
    std::complex<double> acc{0.0, 0.0};
    const double w = 2.0 * kPi * f_hz / sample_rate;
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += x[i] * std::polar(1.0, -w * static_cast<double>(i));
    return 2.0 * std::abs(acc) / static_cast<double>(x.size());
}

/// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft size must be 2^k");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wl{std::cos(ang), std::sin(ang)};
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w{1.0, 0.0};
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

/// Exceedance percentile by selection (std::nth_element), as an
/// algorithmically different oracle for the classifier's sorted order
/// statistics: level exceeded by `percent` % of the samples.
[[nodiscard]] inline double percentile_by_selection(std::vector<double> values, double percent) {
    if (values.empty()) throw std::invalid_argument("empty sample set");
    auto rank = static_cast<std::size_t>(std::llround(percent * values.size() / 100.0));
    rank = std::min(rank, values.size() - 1);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank),
                     values.end(), std::greater<>());
    return values[rank];
}

/// Short-term severity via the classic binned cumulative-probability
/// machinery: logarithmic bins over the sample range instead of exact
/// order statistics.
[[nodiscard]] inline double pst_from_log_cpf(std::span<const double> p_inst,
                                             std::size_t bins = 10000) {
    if (p_inst.size() < 2) throw std::invalid_argument("needs at least 2 samples");
    double lo = 1e300, hi = 0.0;
    for (double v : p_inst) {
        if (v > 0.0) lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= 0.0) return 0.0;
    lo = std::min(lo, hi / 1e8);
    const double log_lo = std::log10(lo), log_hi = std::log10(hi);
    const double width = (log_hi - log_lo) / static_cast<double>(bins);

    std::vector<std::size_t> counts(bins, 0);
    for (double v : p_inst) {
        const double clamped = std::max(v, lo);
        auto idx = static_cast<std::size_t>((std::log10(clamped) - log_lo) / width);
        counts[std::min(idx, bins - 1)] += 1;
    }

    // cumulative exceedance from the top bin down; percentile k is the
    // level below which the top k% of samples lie
    const auto percentile = [&](double k) {
        const double target = k / 100.0 * static_cast<double>(p_inst.size());
        std::size_t cum = 0;
        for (std::size_t b = bins; b-- > 0;) {
            cum += counts[b];
            if (static_cast<double>(cum) >= target)
                return std::pow(10.0, log_lo + (static_cast<double>(b) + 0.5) * width);
        }
        return lo;
    };

    const double p01 = percentile(0.1);
    const double p1s = (percentile(0.7) + percentile(1.0) + percentile(1.5)) / 3.0;
    const double p3s = (percentile(2.2) + percentile(3.0) + percentile(4.0)) / 3.0;
    const double p10s =
        (percentile(6.0) + percentile(8.0) + percentile(10.0) + percentile(13.0) +
         percentile(17.0)) /
        5.0;
    const double p50s = (percentile(30.0) + percentile(50.0) + percentile(80.0)) / 3.0;
    return std::sqrt(0.0314 * p01 + 0.0525 * p1s + 0.0657 * p3s + 0.28 * p10s + 0.08 * p50s);
}

}  // namespace oracles
