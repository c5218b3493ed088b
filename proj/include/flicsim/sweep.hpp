// Sweep harness: map the measurement chain over a (carrier, shape,
// f_m, depth) grid, with a worker pool, append-only checkpointing for
// safe resume, and result summaries (exceedance bands, shape-ordering
// checks, depth-linearity fits).
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "flicsim/fir.hpp"
#include "flicsim/flickermeter.hpp"
#include "flicsim/signal.hpp"
#include "flicsim/version.hpp"

namespace flicsim {

struct SweepDurations {
    double settle_s = 30.0;   // discarded prefix absorbing chain + meter warm-up
    double measure_s = 600.0; // must cover at least one flickermeter window
};

/// Full description of one sweep run. Everything that influences the
/// numbers lives here, so a plan fingerprint identifies a result table.
struct SweepPlan {
    std::string run_id = "sweep";
    int stage = 1;  // 1: curves vs f_m at fixed depths; 2: curves vs depth at fixed f_m
    std::vector<CarrierSpec> carriers;
    std::vector<Shape> shapes;
    std::vector<double> fm_grid_hz;
    std::vector<double> depth_grid_pct;
    SweepDurations durations{};
    FrontEndConfig front_end{};
    FlickermeterConfig meter{};
    bool record_timing = true;  // wall_time_s column; disable for byte-stable CSVs

    void validate() const {
        if (carriers.empty()) throw std::invalid_argument("plan: carriers list is empty");
        if (shapes.empty()) throw std::invalid_argument("plan: shapes list is empty");
        if (fm_grid_hz.empty()) throw std::invalid_argument("plan: fm grid is empty");
        if (depth_grid_pct.empty()) throw std::invalid_argument("plan: depth grid is empty");
        if (stage != 1 && stage != 2)
            throw std::invalid_argument("plan: stage must be 1 or 2, got " + std::to_string(stage));
        for (const CarrierSpec& c : carriers) c.validate();
        for (double fm : fm_grid_hz)
            if (!(fm > 0.0))
                throw std::invalid_argument("plan: f_m must be > 0 Hz, got " + std::to_string(fm));
        for (double d : depth_grid_pct)
            if (d < 0.0 || d >= 200.0)
                throw std::invalid_argument("plan: depth must be in [0, 200) %, got " +
                                            std::to_string(d));
        if (!(durations.settle_s >= 0.0))
            throw std::invalid_argument("plan: settle time must be >= 0 s");
        if (durations.measure_s < meter.window_s)
            throw std::invalid_argument("plan: measure duration " +
                                        std::to_string(durations.measure_s) +
                                        " s is shorter than the flickermeter window " +
                                        std::to_string(meter.window_s) + " s");
        front_end.validate();
        FlickermeterConfig effective = meter;
        effective.input_rate_hz = front_end.meter_rate_hz();
        effective.settle_s = durations.settle_s;
        effective.validate();
    }

    [[nodiscard]] std::size_t point_count() const {
        return carriers.size() * shapes.size() * fm_grid_hz.size() * depth_grid_pct.size();
    }

    struct GridPoint {
        CarrierSpec carrier;
        ModulatingSpec mod;
    };

    /// Grid order: carriers, then shapes, then f_m, then depth
    /// (depth fastest). The results table follows this order.
    [[nodiscard]] GridPoint point_at(std::size_t index) const {
        const std::size_t nd = depth_grid_pct.size();
        const std::size_t nf = fm_grid_hz.size();
        const std::size_t ns = shapes.size();
        GridPoint p;
        p.mod.depth_pct = depth_grid_pct[index % nd];
        index /= nd;
        p.mod.fm_hz = fm_grid_hz[index % nf];
        index /= nf;
        p.mod.shape = shapes[index % ns];
        index /= ns;
        p.carrier = carriers[index];
        return p;
    }

    /// Canonical text form covering every number that affects results;
    /// the checkpoint fingerprint is the FNV-1a hash of this string.
    [[nodiscard]] std::string canonical_text() const;
    [[nodiscard]] std::uint64_t fingerprint() const;
};

[[nodiscard]] inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace detail {

inline void append_num(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g,", v);
    out += buf;
}

}  // namespace detail

inline std::string SweepPlan::canonical_text() const {
    std::string s = "flicsim-plan-v1\n";
    s += "stage=" + std::to_string(stage) + "\ncarriers=";
    for (const CarrierSpec& c : carriers) {
        detail::append_num(s, c.fc_hz);
        detail::append_num(s, c.urms_v);
        detail::append_num(s, c.clip_level);
    }
    s += "\nshapes=";
    for (Shape sh : shapes) {
        s += short_name(sh);
        s += ',';
    }
    s += "\nfm=";
    for (double v : fm_grid_hz) detail::append_num(s, v);
    s += "\ndepth=";
    for (double v : depth_grid_pct) detail::append_num(s, v);
    s += "\ndurations=";
    detail::append_num(s, durations.settle_s);
    detail::append_num(s, durations.measure_s);
    s += "\nfront_end=";
    detail::append_num(s, front_end.synthesis_rate_hz);
    detail::append_num(s, static_cast<double>(front_end.fir_order));
    detail::append_num(s, front_end.fir_cutoff_hz);
    detail::append_num(s, static_cast<double>(front_end.decimation));
    s += "\nmeter=";
    detail::append_num(s, meter.classifier_rate_hz);
    detail::append_num(s, meter.window_s);
    detail::append_num(s, meter.normalization_tau_s);
    s += "\nweighting=";
    detail::append_num(s, meter.weighting.k);
    detail::append_num(s, meter.weighting.lambda);
    detail::append_num(s, meter.weighting.omega1);
    detail::append_num(s, meter.weighting.omega2);
    detail::append_num(s, meter.weighting.omega3);
    detail::append_num(s, meter.weighting.omega4);
    s += '\n';
    return s;
}

inline std::uint64_t SweepPlan::fingerprint() const { return fnv1a64(canonical_text()); }

struct SweepRecord {
    double mc = 1.0;
    Shape shape = Shape::Sinusoidal;
    double fm_hz = 0.0;
    double depth_pct = 0.0;
    double pst = 0.0;
    bool below_floor = true;
    double wall_time_s = 0.0;
    bool failed = false;     // synthesis/meter error; pst kept at 0
    std::string error;
};

struct SweepResult {
    SweepPlan plan;
    std::uint64_t plan_fingerprint = 0;
    std::string tool_version = kVersion;
    std::vector<SweepRecord> records;  // grid order, one per plan point
    std::vector<std::string> errors;   // human-readable per-point failures
    bool complete = true;              // false when cancelled mid-run
};

/// Synthesize one grid point, push it through the acquisition chain,
/// and measure Pst over the post-settle window. A small tail guard is
/// synthesized beyond the window so FIR edge effects never overlap the
/// classifier's data. Errors are captured in the record, not thrown.
[[nodiscard]] inline SweepRecord run_point(const CarrierSpec& carrier, const ModulatingSpec& mod,
                                           const SweepPlan& plan) {
    SweepRecord rec;
    rec.mc = carrier.clip_level;
    rec.shape = mod.shape;
    rec.fm_hz = mod.fm_hz;
    rec.depth_pct = mod.depth_pct;

    const auto t_begin = std::chrono::steady_clock::now();
    try {
        constexpr double kTailGuard = 0.5;  // s, absorbs the FIR end transient
        const double duration = plan.durations.settle_s + plan.durations.measure_s + kTailGuard;
        const double fs = plan.front_end.synthesis_rate_hz;

        const SignalBuffer carrier_buf = synthesize_carrier(carrier, fs, duration);
        const SignalBuffer mod_buf = synthesize_modulating(mod, fs, duration);
        const SignalBuffer input = modulate(carrier_buf, mod_buf, mod.depth_pct);
        const SignalBuffer at_meter_rate = apply_front_end(input, plan.front_end);

        FlickermeterConfig cfg = plan.meter;
        cfg.input_rate_hz = plan.front_end.meter_rate_hz();
        cfg.settle_s = plan.durations.settle_s;
        rec.pst = measure_pst(at_meter_rate, cfg);
        rec.below_floor = below_instrument_floor(rec.pst);
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.pst = 0.0;
        rec.below_floor = true;
    }
    if (plan.record_timing)
        rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                        t_begin).count();
    return rec;
}

// ---------------------------------------------------------------------------
// checkpointing

namespace detail {

inline std::string sanitize_error(std::string msg) {
    for (char& c : msg)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return msg;
}

inline std::string checkpoint_line(std::size_t index, const SweepRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%s,%.12g,%.12g,%.9e,%d,%.3f,%d,", index, r.mc,
                  std::string(short_name(r.shape)).c_str(), r.fm_hz, r.depth_pct, r.pst,
                  r.below_floor ? 1 : 0, r.wall_time_s, r.failed ? 1 : 0);
    return std::string(buf) + sanitize_error(r.error);
}

inline bool parse_checkpoint_line(const std::string& line, std::size_t& index, SweepRecord& r) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',' && fields.size() < 9) {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);  // error text (may contain semicolons)
    if (fields.size() != 10) return false;
    try {
        index = static_cast<std::size_t>(std::stoull(fields[0]));
        r.mc = std::stod(fields[1]);
        r.shape = parse_shape(fields[2]);
        r.fm_hz = std::stod(fields[3]);
        r.depth_pct = std::stod(fields[4]);
        r.pst = std::stod(fields[5]);
        r.below_floor = fields[6] == "1";
        r.wall_time_s = std::stod(fields[7]);
        r.failed = fields[8] == "1";
        r.error = fields[9];
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

}  // namespace detail

inline std::string checkpoint_header(const SweepPlan& plan) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "#flicsim-checkpoint v1 fingerprint=%016" PRIx64,
                  plan.fingerprint());
    return buf;
}

/// Load finished points from an interrupted run. Returns false when the
/// file does not exist; throws when it belongs to a different plan.
/// Truncated trailing lines (crash mid-write) are skipped silently.
inline bool load_checkpoint(const std::string& path, const SweepPlan& plan,
                            std::vector<SweepRecord>& records, std::vector<bool>& done) {
    std::ifstream in(path);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line)) return false;
    if (line != checkpoint_header(plan))
        throw std::runtime_error("checkpoint '" + path +
                                 "' belongs to a different plan (fingerprint mismatch); "
                                 "move it away or use a fresh output directory");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t index = 0;
        SweepRecord rec;
        if (!detail::parse_checkpoint_line(line, index, rec)) continue;
        if (index >= records.size()) continue;
        records[index] = std::move(rec);
        done[index] = true;
    }
    return true;
}

struct RunOptions {
    int workers = 1;
    std::string checkpoint_path;                 // empty: no checkpointing
    const std::atomic<bool>* cancel = nullptr;   // optional cooperative cancellation
    std::function<void(std::size_t done, std::size_t total, const SweepRecord&)> on_point;
};

/// Evaluate every grid point of the plan. Points are independent; the
/// worker pool writes into preallocated slots, so the result table is
/// in grid order regardless of worker count or finish order.
[[nodiscard]] inline SweepResult run_sweep(const SweepPlan& plan, const RunOptions& opts = {}) {
    plan.validate();
    if (opts.workers < 1) throw std::invalid_argument("worker count must be >= 1");

    const std::size_t total = plan.point_count();
    SweepResult result;
    result.plan = plan;
    result.plan_fingerprint = plan.fingerprint();
    result.records.resize(total);
    std::vector<bool> done(total, false);

    std::ofstream checkpoint;
    if (!opts.checkpoint_path.empty()) {
        const bool resumed = load_checkpoint(opts.checkpoint_path, plan, result.records, done);
        checkpoint.open(opts.checkpoint_path, std::ios::app);
        if (!checkpoint)
            throw std::runtime_error("cannot open checkpoint file '" + opts.checkpoint_path + "'");
        if (!resumed) checkpoint << checkpoint_header(plan) << '\n' << std::flush;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> completed{0};
    std::mutex sink_mutex;

    const auto worker = [&] {
        for (;;) {
            if (opts.cancel && opts.cancel->load(std::memory_order_relaxed)) return;
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= total) return;
            if (done[i]) {
                completed.fetch_add(1, std::memory_order_relaxed);
                continue;
            }
            const SweepPlan::GridPoint pt = plan.point_at(i);
            SweepRecord rec = run_point(pt.carrier, pt.mod, plan);
            const std::size_t n_done = completed.fetch_add(1, std::memory_order_relaxed) + 1;
            std::lock_guard<std::mutex> lock(sink_mutex);
            if (checkpoint.is_open())
                checkpoint << detail::checkpoint_line(i, rec) << '\n' << std::flush;
            if (opts.on_point) opts.on_point(n_done, total, rec);
            result.records[i] = std::move(rec);
            done[i] = true;
        }
    };

    if (opts.workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(opts.workers));
        for (int w = 0; w < opts.workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    result.complete = true;
    for (std::size_t i = 0; i < total; ++i)
        if (!done[i]) result.complete = false;
    for (std::size_t i = 0; i < total; ++i) {
        const SweepRecord& r = result.records[i];
        if (done[i] && r.failed) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "point %zu (m_c=%g, %s, f_m=%g Hz, depth=%g%%): ", i,
                          r.mc, std::string(short_name(r.shape)).c_str(), r.fm_hz, r.depth_pct);
            result.errors.push_back(buf + r.error);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// stage presets

/// Stage I frequency grid: log-spaced points across [0.01, 150] Hz,
/// then one point every 25 Hz from 158.8 Hz up to 1050 Hz. The upper
/// band sits 8.8 Hz above multiples of 50 Hz so that interharmonic
/// placement matches the 208.8/1008.8 Hz study points.
[[nodiscard]] inline std::vector<double> stage1_fm_grid() {
    std::vector<double> grid;
    const double lo = 0.01, hi = 150.0;
    const int per_decade = 12;
    const int n = static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade)) + 1;
    for (int i = 0; i < n; ++i) {
        const double f = lo * std::pow(10.0, static_cast<double>(i) / per_decade);
        grid.push_back(std::min(f, hi));
    }
    if (grid.back() < hi) grid.push_back(hi);
    for (double f = 158.8; f <= 1050.0; f += 25.0) grid.push_back(f);
    return grid;
}

[[nodiscard]] inline std::vector<double> stage1_depth_grid() { return {1.0, 5.0, 10.0}; }

[[nodiscard]] inline std::vector<double> stage2_fm_grid() { return {208.8, 1008.8}; }

[[nodiscard]] inline std::vector<double> stage2_depth_grid() {
    return {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0};
}

/// Run a plan under the stage I protocol; empty grids take the stage I
/// defaults (full frequency sweep at depths 1/5/10 %).
[[nodiscard]] inline SweepResult run_stage1(SweepPlan plan, const RunOptions& opts = {}) {
    plan.stage = 1;
    if (plan.fm_grid_hz.empty()) plan.fm_grid_hz = stage1_fm_grid();
    if (plan.depth_grid_pct.empty()) plan.depth_grid_pct = stage1_depth_grid();
    return run_sweep(plan, opts);
}

/// Run a plan under the stage II protocol; empty grids take the stage
/// II defaults (208.8 and 1008.8 Hz across the depth range).
[[nodiscard]] inline SweepResult run_stage2(SweepPlan plan, const RunOptions& opts = {}) {
    plan.stage = 2;
    if (plan.fm_grid_hz.empty()) plan.fm_grid_hz = stage2_fm_grid();
    if (plan.depth_grid_pct.empty()) plan.depth_grid_pct = stage2_depth_grid();
    return run_sweep(plan, opts);
}

// ---------------------------------------------------------------------------
// summaries

/// Least-squares line y = slope*x + intercept with coefficient of
/// determination; valid when at least two distinct x values are given.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n_points = 0;
    bool sufficient = false;  // >= 3 points entered the fit
};

[[nodiscard]] inline LinearFit fit_line(const std::vector<double>& x,
                                        const std::vector<double>& y) {
    LinearFit fit;
    if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
    fit.n_points = x.size();
    fit.sufficient = x.size() >= 3;
    if (x.size() < 2) return fit;
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double mean_y = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double pred = fit.slope * x[i] + fit.intercept;
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    }
    fit.r2 = ss_tot == 0.0 ? (ss_res == 0.0 ? 1.0 : 0.0) : 1.0 - ss_res / ss_tot;
    return fit;
}

struct ExceedanceBand {
    double fm_lo_hz = 0.0;
    double fm_hi_hz = 0.0;
};

struct SummaryReport {
    struct BandEntry {
        double mc;
        Shape shape;
        double depth_pct;
        std::vector<ExceedanceBand> bands;  // maximal above-floor runs, ascending f_m
    };
    struct OrderingCheck {
        double mc;
        double depth_pct;
        double fm_hz;
        // Pst per shape in severity order rect, trap, sin, tri
        double pst_rect, pst_trap, pst_sin, pst_tri;
        double worst_violation_rel;  // 0 when the ordering holds outright
        bool satisfied;              // violations within 3 % relative
    };
    struct FitEntry {
        double mc;
        Shape shape;
        double fm_hz;
        LinearFit fit;            // Pst vs depth over above-floor points
        bool strictly_increasing; // over the full depth grid
    };

    std::vector<BandEntry> exceedance;
    std::vector<OrderingCheck> ordering;
    std::vector<FitEntry> fits;

    [[nodiscard]] std::string render() const;
};

inline constexpr double kOrderingToleranceRel = 0.03;

namespace detail {

[[nodiscard]] inline const SweepRecord* find_record(const SweepResult& result, double mc,
                                                    Shape shape, double fm, double depth) {
    for (const SweepRecord& r : result.records)
        if (r.mc == mc && r.shape == shape && r.fm_hz == fm && r.depth_pct == depth) return &r;
    return nullptr;
}

}  // namespace detail

/// Derive the analysis tables from a finished sweep: per-curve
/// above-floor frequency bands, rect >= trap >= sin >= tri ordering
/// checks wherever all four shapes are measured and above floor, and
/// per-(carrier, shape, f_m) linear fits of Pst against depth.
[[nodiscard]] inline SummaryReport summarize(const SweepResult& result) {
    SummaryReport rep;
    const SweepPlan& plan = result.plan;

    std::vector<double> fm_sorted = plan.fm_grid_hz;
    std::sort(fm_sorted.begin(), fm_sorted.end());
    std::vector<double> depth_sorted = plan.depth_grid_pct;
    std::sort(depth_sorted.begin(), depth_sorted.end());

    for (const CarrierSpec& c : plan.carriers) {
        for (Shape shape : plan.shapes) {
            for (double depth : depth_sorted) {
                SummaryReport::BandEntry entry{c.clip_level, shape, depth, {}};
                bool in_band = false;
                for (double fm : fm_sorted) {
                    const SweepRecord* r =
                        detail::find_record(result, c.clip_level, shape, fm, depth);
                    const bool above = r != nullptr && !r->failed && !r->below_floor;
                    if (above && !in_band) {
                        entry.bands.push_back({fm, fm});
                        in_band = true;
                    } else if (above) {
                        entry.bands.back().fm_hi_hz = fm;
                    } else {
                        in_band = false;
                    }
                }
                rep.exceedance.push_back(std::move(entry));
            }
        }
    }

    for (const CarrierSpec& c : plan.carriers) {
        for (double depth : depth_sorted) {
            for (double fm : fm_sorted) {
                const SweepRecord* rect =
                    detail::find_record(result, c.clip_level, Shape::Rectangular, fm, depth);
                const SweepRecord* trap =
                    detail::find_record(result, c.clip_level, Shape::Trapezoidal, fm, depth);
                const SweepRecord* sin_r =
                    detail::find_record(result, c.clip_level, Shape::Sinusoidal, fm, depth);
                const SweepRecord* tri =
                    detail::find_record(result, c.clip_level, Shape::Triangular, fm, depth);
                const auto usable = [](const SweepRecord* r) {
                    return r != nullptr && !r->failed && !r->below_floor;
                };
                if (!usable(rect) || !usable(trap) || !usable(sin_r) || !usable(tri)) continue;
                SummaryReport::OrderingCheck chk;
                chk.mc = c.clip_level;
                chk.depth_pct = depth;
                chk.fm_hz = fm;
                chk.pst_rect = rect->pst;
                chk.pst_trap = trap->pst;
                chk.pst_sin = sin_r->pst;
                chk.pst_tri = tri->pst;
                chk.worst_violation_rel = 0.0;
                const double seq[4] = {rect->pst, trap->pst, sin_r->pst, tri->pst};
                for (int i = 0; i < 3; ++i) {
                    if (seq[i] < seq[i + 1]) {
                        const double viol = (seq[i + 1] - seq[i]) / seq[i + 1];
                        chk.worst_violation_rel = std::max(chk.worst_violation_rel, viol);
                    }
                }
                chk.satisfied = chk.worst_violation_rel <= kOrderingToleranceRel;
                rep.ordering.push_back(chk);
            }
        }
    }

    for (const CarrierSpec& c : plan.carriers) {
        for (Shape shape : plan.shapes) {
            for (double fm : fm_sorted) {
                std::vector<double> xs, ys;
                bool increasing = true;
                double prev = -1.0;
                bool have_prev = false;
                for (double depth : depth_sorted) {
                    const SweepRecord* r =
                        detail::find_record(result, c.clip_level, shape, fm, depth);
                    if (r == nullptr || r->failed) continue;
                    if (have_prev && r->pst <= prev) increasing = false;
                    prev = r->pst;
                    have_prev = true;
                    if (!r->below_floor) {
                        xs.push_back(depth);
                        ys.push_back(r->pst);
                    }
                }
                if (!have_prev) continue;
                rep.fits.push_back({c.clip_level, shape, fm, fit_line(xs, ys), increasing});
            }
        }
    }
    return rep;
}

inline std::string SummaryReport::render() const {
    std::ostringstream os;
    os << "== above-floor frequency bands (Pst >= " << kPstFloor << ") ==\n";
    for (const BandEntry& e : exceedance) {
        os << "m_c=" << e.mc << " " << short_name(e.shape) << " depth=" << e.depth_pct << "%: ";
        if (e.bands.empty()) {
            os << "none\n";
            continue;
        }
        for (std::size_t i = 0; i < e.bands.size(); ++i) {
            if (i) os << ", ";
            os << "[" << e.bands[i].fm_lo_hz << ", " << e.bands[i].fm_hi_hz << "] Hz";
        }
        os << "\n";
    }
    os << "\n== shape ordering rect >= trap >= sin >= tri (tolerance "
       << kOrderingToleranceRel * 100.0 << "% rel) ==\n";
    if (ordering.empty()) os << "no grid point has all four shapes above floor\n";
    for (const OrderingCheck& c : ordering) {
        os << "m_c=" << c.mc << " depth=" << c.depth_pct << "% f_m=" << c.fm_hz << " Hz: "
           << (c.satisfied ? "ok" : "VIOLATED") << " (rect=" << c.pst_rect
           << ", trap=" << c.pst_trap << ", sin=" << c.pst_sin << ", tri=" << c.pst_tri
           << ", worst=" << c.worst_violation_rel * 100.0 << "%)\n";
    }
    os << "\n== Pst vs depth linear fits over above-floor points ==\n";
    for (const FitEntry& f : fits) {
        os << "m_c=" << f.mc << " " << short_name(f.shape) << " f_m=" << f.fm_hz << " Hz: ";
        if (!f.fit.sufficient) {
            os << "insufficient above-floor points (" << f.fit.n_points << ")";
        } else {
            os << "slope=" << f.fit.slope << " intercept=" << f.fit.intercept
               << " R2=" << f.fit.r2;
        }
        os << (f.strictly_increasing ? ", strictly increasing" : ", NOT strictly increasing")
           << " (n=" << f.fit.n_points << ")\n";
    }
    return os.str();
}

}  // namespace flicsim
