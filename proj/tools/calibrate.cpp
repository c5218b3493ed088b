// Regenerates the block 4 calibration constant: the reciprocal of the
// uncalibrated full-rate block 4 maximum for the reference point
// (230 V / 50 Hz carrier, sinusoidal modulation, 8.8 Hz, dU/U = 0.25 %)
// at the default 20 kHz meter rate, max taken over a 30 s window after
// a 30 s settle. The printed value is frozen as kBlock4Calibration and
// guarded by a conformance test; rerun this tool after any change to
// the weighting chain or its discretization.
#include <algorithm>
#include <cstdio>

#include "flicsim/flickermeter.hpp"
#include "flicsim/signal.hpp"

int main() {
    using namespace flicsim;

    const double fs = 20000.0;
    const double settle_s = 30.0;
    const double window_s = 30.0;

    CarrierSpec carrier;  // defaults: 230 V rms, 50 Hz, no clipping
    ModulatingSpec mod;
    mod.shape = Shape::Sinusoidal;
    mod.fm_hz = 8.8;
    mod.depth_pct = 0.25;

    const double duration = settle_s + window_s;
    const SignalBuffer carrier_buf = synthesize_carrier(carrier, fs, duration);
    const SignalBuffer mod_buf = synthesize_modulating(mod, fs, duration);
    const SignalBuffer input = modulate(carrier_buf, mod_buf, mod.depth_pct);

    FlickermeterConfig cfg;
    cfg.input_rate_hz = fs;
    cfg.settle_s = settle_s;
    cfg.window_s = window_s;

    Block1State b1;
    BiquadCascade b3 = build_weighting_cascade(fs);
    Biquad b4 = design_lowpass1(0.3, fs);
    BiquadState b4s;

    SignalBuffer work = block1_normalize(input, b1, cfg);
    work = block2_square(std::move(work));
    work = block3_weight(std::move(work), b3);
    work = block4_smooth(std::move(work), b4, b4s, 1.0);  // uncalibrated

    double peak = 0.0;
    const auto first = static_cast<std::size_t>(settle_s * fs);
    for (std::size_t i = first; i < work.size(); ++i) peak = std::max(peak, work.samples[i]);

    std::printf("uncalibrated block 4 peak : %.15e\n", peak);
    std::printf("calibration constant      : %.15e\n", 1.0 / peak);
    std::printf("frozen kBlock4Calibration : %.15e\n", kBlock4Calibration);
    std::printf("relative difference       : %.3e\n",
                std::abs(1.0 / peak - kBlock4Calibration) / kBlock4Calibration);
    return 0;
}
