// Built-in conformance suite behind `flicsim validate`: distortion
// anchors for the clipped carrier, front-end filter response, the
// weighting chain against its analog reference, the classifier's
// closed-form identities, and the meter's unity-severity points for
// the 230 V / 50 Hz reference lamp.
#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "flicsim/fir.hpp"
#include "flicsim/flickermeter.hpp"
#include "flicsim/signal.hpp"
#include "flicsim/thd.hpp"

namespace flicsim {

struct ConformanceCheck {
    std::string name;
    bool passed = false;
    std::string details;
};

struct ConformanceReport {
    std::vector<ConformanceCheck> checks;

    [[nodiscard]] bool all_passed() const {
        for (const ConformanceCheck& c : checks)
            if (!c.passed) return false;
        return true;
    }

    [[nodiscard]] std::string render() const {
        std::ostringstream os;
        for (const ConformanceCheck& c : checks)
            os << (c.passed ? "PASS" : "FAIL") << "  " << c.name << ": " << c.details << "\n";
        os << (all_passed() ? "all checks passed" : "CONFORMANCE FAILURE") << "\n";
        return os.str();
    }
};

/// Unity-severity operating points for rectangular modulation of the
/// 230 V / 50 Hz reference lamp, from the IEC 61000-4-15 compliance
/// table (rate in changes per minute; one change = half a modulation
/// period, so f_m = rate / 120).
struct RectangularCompliancePoint {
    double changes_per_minute;
    double depth_pct;
};

inline constexpr RectangularCompliancePoint kRectComplianceTable[] = {
    {1.0, 2.724}, {2.0, 2.211}, {7.0, 1.459}, {39.0, 0.906}, {110.0, 0.725}, {1620.0, 0.402},
};

/// Sinusoidal unity-severity point at 8.8 Hz: the perceptibility
/// threshold depth (0.25 %) divided by the classifier's severity for
/// threshold-level sinusoidal modulation (Pst = 0.71173, closed form
/// from the steady-state percentile distribution).
inline constexpr double kSinCompliancePstOneDepthPct = 0.3513;

namespace detail {

inline ConformanceCheck check(const std::string& name, bool passed, const std::string& details) {
    return ConformanceCheck{name, passed, details};
}

inline std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

/// Pst of a rectangular- or sinusoidal-modulated clean carrier, meter
/// running directly at its 20 kHz working rate (no front end needed:
/// the test signals carry no content near the decimation band).
inline double compliance_pst(Shape shape, double fm_hz, double depth_pct,
                             const WeightingConstants& wc) {
    const double fs = 20000.0;
    FlickermeterConfig cfg;
    cfg.input_rate_hz = fs;
    cfg.settle_s = 120.0;  // slow points need the classifier to see full cycles
    cfg.window_s = 600.0;
    cfg.weighting = wc;

    const double duration = cfg.settle_s + cfg.window_s;
    CarrierSpec carrier;  // 230 V / 50 Hz, no distortion
    const SignalBuffer carrier_buf = synthesize_carrier(carrier, fs, duration);
    ModulatingSpec mod;
    mod.shape = shape;
    mod.fm_hz = fm_hz;
    mod.depth_pct = depth_pct;
    const SignalBuffer mod_buf = synthesize_modulating(mod, fs, duration);
    return measure_pst(modulate(carrier_buf, mod_buf, depth_pct), cfg);
}

}  // namespace detail

/// Run every conformance check. The weighting constants default to the
/// reference lamp; passing perturbed values must make the response and
/// severity checks fail (that path is itself under test).
[[nodiscard]] inline ConformanceReport run_conformance_suite(const WeightingConstants& wc = {}) {
    ConformanceReport rep;

    // --- carrier distortion anchors ---
    {
        CarrierSpec spec;
        const double fs = 80000.0;
        spec.clip_level = 1.0;
        const double t1 = thd(synthesize_carrier(spec, fs, 1.0), spec.fc_hz, 40);
        rep.checks.push_back(detail::check("thd-pure-carrier", t1 <= 1e-9,
                                           detail::fmt("m_c=1 -> THD %.3e (limit 1e-9)", t1)));
        spec.clip_level = 0.8;
        const double t2 = thd(synthesize_carrier(spec, fs, 1.0), spec.fc_hz, 40);
        rep.checks.push_back(detail::check(
            "thd-clip-0.8", std::abs(t2 - 0.08) <= 0.01,
            detail::fmt("m_c=0.8 -> THD %.4f (expect 0.08 +- 0.01)", t2)));
        spec.clip_level = 0.1;
        const double t3 = thd(synthesize_carrier(spec, fs, 1.0), spec.fc_hz, 40);
        rep.checks.push_back(detail::check(
            "thd-clip-0.1", std::abs(t3 - 0.43) <= 0.02,
            detail::fmt("m_c=0.1 -> THD %.4f (expect 0.43 +- 0.02)", t3)));
    }

    // --- front-end FIR response ---
    {
        const FirFilter fir = design_lowpass_fir(200, 8000.0, 80000.0);
        const double g_pass = fir_gain_at(fir, 4000.0);
        rep.checks.push_back(detail::check(
            "fir-passband-4kHz", std::abs(g_pass - 1.0) <= 0.01,
            detail::fmt("|H(4 kHz)| = %.5f (expect 1 +- 0.01)", g_pass)));

        // locate the -6 dB crossing by bisection around the nominal cutoff
        double lo = 7000.0, hi = 9000.0;
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (fir_gain_at(fir, mid) > 0.5 ? lo : hi) = mid;
        }
        const double f6 = 0.5 * (lo + hi);
        rep.checks.push_back(detail::check(
            "fir-cutoff-6dB", std::abs(f6 - 8000.0) <= 0.02 * 8000.0,
            detail::fmt("-6 dB at %.1f Hz (expect 8000 +- 160)", f6)));

        double worst = 0.0;
        for (double f = 10000.0; f <= 39000.0; f += 100.0)
            worst = std::max(worst, fir_gain_at(fir, f));
        rep.checks.push_back(detail::check(
            "fir-stopband", worst <= std::pow(10.0, -50.0 / 20.0),
            detail::fmt("max |H| in [10, 39] kHz = %.3e (limit 3.162e-3, -50 dB)", worst)));
    }

    // --- weighting chain against the analog reference-lamp response ---
    {
        const double fs = 20000.0;
        BiquadCascade cascade = build_weighting_cascade(fs, wc);

        double peak_f = 0.0, peak_g = 0.0;
        for (double f = 0.5; f <= 35.0; f += 0.01) {
            const double g = cascade.gain_at(f, fs);
            if (g > peak_g) {
                peak_g = g;
                peak_f = f;
            }
        }
        rep.checks.push_back(detail::check(
            "weighting-peak-location", std::abs(peak_f - 8.8) <= 0.3,
            detail::fmt("peak gain %.5f at %.2f Hz (expect 8.8 +- 0.3)", peak_g, peak_f)));

        // The discretized chain must reproduce the reference lamp's
        // analog response; this pins the constants, not just the shape.
        double worst_err = 0.0, worst_f = 0.0;
        for (double f : {1.0, 2.0, 5.0, 8.8, 15.0, 25.0}) {
            const double ref = weighting_analog_gain(f);  // reference constants
            const double got = cascade.gain_at(f, fs);
            const double err = std::abs(got - ref) / ref;
            if (err > worst_err) {
                worst_err = err;
                worst_f = f;
            }
        }
        rep.checks.push_back(detail::check(
            "weighting-response-reference", worst_err <= 0.01,
            detail::fmt("worst deviation %.3f%% at %.1f Hz (limit 1%%)", worst_err * 100.0,
                        worst_f)));

        const double g100 = cascade.gain_at(100.0, fs);
        const double g88 = cascade.gain_at(8.8, fs);
        rep.checks.push_back(detail::check(
            "weighting-100Hz-rejection", g100 <= g88 * std::pow(10.0, -40.0 / 20.0),
            detail::fmt("|H(100)|/|H(8.8)| = %.3e (limit 1e-2, -40 dB)", g100 / g88)));
    }

    // --- classifier closed forms ---
    {
        const std::vector<double> ones(30000, 1.0);
        const double pst1 = block5_classify(ones);
        const double expect1 = std::sqrt(0.0314 + 0.0525 + 0.0657 + 0.28 + 0.08);
        rep.checks.push_back(detail::check(
            "classifier-constant-input", std::abs(pst1 - expect1) <= 1e-12,
            detail::fmt("Pst(P_inst=1) = %.15f (expect %.15f)", pst1, expect1)));

        const std::vector<double> fours(30000, 4.0);
        const double pst4 = block5_classify(fours);
        rep.checks.push_back(detail::check(
            "classifier-sqrt-scaling", std::abs(pst4 - 2.0 * expect1) <= 1e-12,
            detail::fmt("Pst(P_inst=4) = %.15f (expect %.15f)", pst4, 2.0 * expect1)));
    }

    // --- unity-severity operating points ---
    {
        const double pst = detail::compliance_pst(Shape::Sinusoidal, 8.8,
                                                  kSinCompliancePstOneDepthPct, wc);
        rep.checks.push_back(detail::check(
            "compliance-sin-8.8Hz", std::abs(pst - 1.0) <= 0.08,
            detail::fmt("Pst = %.4f at depth %.4f%% (expect 1 +- 0.08)", pst,
                        kSinCompliancePstOneDepthPct)));
    }
    for (const RectangularCompliancePoint& point : kRectComplianceTable) {
        const double fm = point.changes_per_minute / 120.0;
        const double pst = detail::compliance_pst(Shape::Rectangular, fm, point.depth_pct, wc);
        char name[64];
        std::snprintf(name, sizeof name, "compliance-rect-%gcpm", point.changes_per_minute);
        rep.checks.push_back(detail::check(
            name, std::abs(pst - 1.0) <= 0.08,
            detail::fmt("Pst = %.4f at f_m = %.5f Hz, depth %.3f%% (expect 1 +- 0.08)", pst, fm,
                        point.depth_pct)));
    }

    // --- determinism of a full measurement ---
    {
        const double a = detail::compliance_pst(Shape::Sinusoidal, 8.8, 0.25, wc);
        const double b = detail::compliance_pst(Shape::Sinusoidal, 8.8, 0.25, wc);
        rep.checks.push_back(detail::check("measurement-determinism", a == b,
                                           detail::fmt("repeat runs: %.12e vs %.12e", a, b)));
    }

    return rep;
}

}  // namespace flicsim
