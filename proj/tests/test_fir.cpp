// Front-end tests: windowed-sinc design, measured vs computed response,
// decimation, aliasing behavior, and the fused filter+decimate path.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <span>
#include <vector>

#include "flicsim/fir.hpp"
#include "flicsim/signal.hpp"

#include "oracles.hpp"

using namespace flicsim;

namespace {

constexpr double kFs = 80000.0;
constexpr int kOrder = 200;
constexpr double kCutoff = 8000.0;

/// Gain through the filter measured by actually filtering a tone and
/// projecting the interior of the output back onto it; independent of
/// the tap-based evaluator. f must be a multiple of 5 Hz so the 16000
/// sample projection span covers an integer number of periods.
double measured_tone_gain(const FirFilter& f, double freq) {
    constexpr std::size_t span = 16000, start = 200;
    SignalBuffer in;
    in.sample_rate = kFs;
    in.samples.resize(span + 2 * start);
    for (std::size_t i = 0; i < in.size(); ++i)
        in.samples[i] = std::sin(kTwoPi * freq * static_cast<double>(i) / kFs);
    const SignalBuffer out = apply_fir(in, f);
    const std::span<const double> interior{out.samples.data() + start, span};
    return oracles::projected_amplitude(interior, freq, kFs);
}

}  // namespace

TEST_CASE("lowpass taps are symmetric with unit DC gain", "[fir]") {
    const FirFilter f = design_lowpass_fir(kOrder, kCutoff, kFs);
    REQUIRE(f.taps.size() == static_cast<std::size_t>(kOrder) + 1);
    CHECK(f.warmup_samples() == 100);

    double sum = 0.0;
    for (double t : f.taps) sum += t;
    CHECK(sum == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(fir_gain_at(f, 0.0) == Catch::Approx(1.0).epsilon(1e-12));

    for (int k = 0; k <= kOrder; ++k)
        REQUIRE(f.taps[static_cast<std::size_t>(k)] ==
                f.taps[static_cast<std::size_t>(kOrder - k)]);
}

TEST_CASE("filtering an impulse reproduces the taps", "[fir]") {
    const FirFilter f = design_lowpass_fir(kOrder, kCutoff, kFs);
    SignalBuffer impulse;
    impulse.sample_rate = kFs;
    impulse.samples.assign(1000, 0.0);
    impulse.samples[500] = 1.0;
    const SignalBuffer out = apply_fir(impulse, f);
    // group-delay compensation places h[k] at index 500 - order/2 + k
    for (int k = 0; k <= kOrder; ++k)
        REQUIRE(out.samples[static_cast<std::size_t>(500 - kOrder / 2 + k)] ==
                f.taps[static_cast<std::size_t>(k)]);
}

TEST_CASE("measured tone gain matches the tap-based response", "[fir]") {
    const FirFilter f = design_lowpass_fir(kOrder, kCutoff, kFs);
    for (double freq : {50.0, 1000.0, 4000.0, 8000.0, 12000.0, 19000.0}) {
        INFO("f = " << freq << " Hz");
        CHECK(measured_tone_gain(f, freq) ==
              Catch::Approx(fir_gain_at(f, freq)).margin(1e-8));
    }
}

TEST_CASE("front-end response hits its passband, cutoff, and stopband marks", "[fir]") {
    const FirFilter f = design_lowpass_fir(kOrder, kCutoff, kFs);
    CHECK(std::abs(fir_gain_at(f, 50.0) - 1.0) < 1e-3);
    CHECK(std::abs(fir_gain_at(f, 4000.0) - 1.0) < 0.01);
    CHECK(fir_gain_at(f, kCutoff) == Catch::Approx(0.5).epsilon(0.02));  // -6 dB point
    double worst = 0.0;
    for (double freq = 10000.0; freq <= 39000.0; freq += 50.0)
        worst = std::max(worst, fir_gain_at(f, freq));
    CHECK(worst < std::pow(10.0, -50.0 / 20.0));
}

TEST_CASE("broadband noise keeps less than 1e-4 of its energy above the stopband edge",
          "[fir]") {
    const FirFilter f = design_lowpass_fir(kOrder, kCutoff, kFs);
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    SignalBuffer noise;
    noise.sample_rate = kFs;
    noise.samples.resize(8192 + 400);
    for (double& v : noise.samples) v = dist(rng);
    const SignalBuffer out = apply_fir(noise, f);

    std::vector<std::complex<double>> spec(8192);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double hann =
            0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / (spec.size() - 1));
        spec[i] = out.samples[i + 200] * hann;
    }
    oracles::fft(spec);

    double total = 0.0, above = 0.0;
    const double bin_hz = kFs / static_cast<double>(spec.size());
    for (std::size_t k = 1; k < spec.size() / 2; ++k) {
        const double e = std::norm(spec[k]);
        total += e;
        if (static_cast<double>(k) * bin_hz >= 10000.0) above += e;
    }
    CHECK(above / total < 1e-4);
}

TEST_CASE("decimation keeps every n-th sample and rescales the rate", "[fir]") {
    SignalBuffer sig;
    sig.sample_rate = 80000.0;
    sig.samples.resize(1001);
    for (std::size_t i = 0; i < sig.samples.size(); ++i)
        sig.samples[i] = static_cast<double>(i);

    const SignalBuffer same = decimate(sig, 1);
    CHECK(same.samples == sig.samples);
    CHECK(same.sample_rate == sig.sample_rate);

    const SignalBuffer quarter = decimate(sig, 4);
    CHECK(quarter.sample_rate == 20000.0);
    REQUIRE(quarter.size() == 251);
    for (std::size_t i = 0; i < quarter.size(); ++i)
        REQUIRE(quarter.samples[i] == static_cast<double>(4 * i));

    CHECK_THROWS_AS(decimate(sig, 0), std::invalid_argument);
}

TEST_CASE("fused filter+decimate is bit-identical to the two-step chain", "[fir]") {
    const FirFilter f = design_lowpass_fir(kOrder, kCutoff, kFs);
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> dist(-230.0, 230.0);
    SignalBuffer sig;
    sig.sample_rate = kFs;
    sig.samples.resize(40003);  // deliberately not a multiple of the factor
    for (double& v : sig.samples) v = dist(rng);

    const SignalBuffer two_step = decimate(apply_fir(sig, f), 4);
    const SignalBuffer fused = apply_fir_decimating(sig, f, 4);
    REQUIRE(fused.size() == two_step.size());
    CHECK(fused.sample_rate == two_step.sample_rate);
    for (std::size_t i = 0; i < fused.size(); ++i)
        REQUIRE(fused.samples[i] == two_step.samples[i]);
}

TEST_CASE("a passband tone crosses the whole front end unchanged", "[fir]") {
    FrontEndConfig cfg;  // 80 kHz, order 200, 8 kHz cutoff, decimate by 4
    SignalBuffer tone;
    tone.sample_rate = cfg.synthesis_rate_hz;
    tone.samples.resize(24000);
    for (std::size_t i = 0; i < tone.size(); ++i)
        tone.samples[i] =
            std::sin(kTwoPi * 1000.0 * static_cast<double>(i) / cfg.synthesis_rate_hz);
    const SignalBuffer out = apply_front_end(tone, cfg);
    CHECK(out.sample_rate == 20000.0);

    const std::span<const double> interior{out.samples.data() + 100, 4000};
    const double amp = oracles::projected_amplitude(interior, 1000.0, out.sample_rate);
    CHECK(amp == Catch::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("stopband tones fold into the decimated band already attenuated", "[fir]") {
    // 19 kHz at an 80 kHz rate folds onto 1 kHz after decimation to
    // 20 kHz; the residue must equal the filter's 19 kHz gain.
    FrontEndConfig cfg;
    const FirFilter f = design_lowpass_fir(cfg.fir_order, cfg.fir_cutoff_hz,
                                           cfg.synthesis_rate_hz);
    SignalBuffer tone;
    tone.sample_rate = cfg.synthesis_rate_hz;
    tone.samples.resize(24000);
    for (std::size_t i = 0; i < tone.size(); ++i)
        tone.samples[i] =
            std::sin(kTwoPi * 19000.0 * static_cast<double>(i) / cfg.synthesis_rate_hz);
    const SignalBuffer out = apply_front_end(tone, cfg);

    const std::span<const double> interior{out.samples.data() + 100, 4000};
    const double alias = oracles::projected_amplitude(interior, 1000.0, out.sample_rate);
    CHECK(alias < std::pow(10.0, -50.0 / 20.0));
    CHECK(alias == Catch::Approx(fir_gain_at(f, 19000.0)).margin(1e-8));
}

TEST_CASE("front-end configuration rejects inconsistent setups", "[fir]") {
    CHECK_THROWS_AS(design_lowpass_fir(201, 8000.0, 80000.0), std::invalid_argument);
    CHECK_THROWS_AS(design_lowpass_fir(200, 0.0, 80000.0), std::invalid_argument);
    CHECK_THROWS_AS(design_lowpass_fir(200, 40000.0, 80000.0), std::invalid_argument);

    FrontEndConfig cfg;
    cfg.decimation = 8;  // 8 kHz passband above the 5 kHz post-decimation Nyquist
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = FrontEndConfig{};
    cfg.fir_order = 3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = FrontEndConfig{};
    SignalBuffer wrong_rate;
    wrong_rate.sample_rate = 40000.0;
    wrong_rate.samples.resize(1000, 0.0);
    CHECK_THROWS_AS(apply_front_end(wrong_rate, cfg), std::invalid_argument);
}
