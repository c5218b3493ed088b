// File formats: waveform CSV and binary frames, FIR tap export, P_inst
// traces, sweep result tables, JSON plan files, and the run metadata
// sidecar. The results CSV is the canonical output; everything else is
// interchange or debugging support.
#pragma once

#include <bit>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "flicsim/fir.hpp"
#include "flicsim/flickermeter.hpp"
#include "flicsim/signal.hpp"
#include "flicsim/sweep.hpp"
#include "flicsim/version.hpp"

namespace flicsim {

inline constexpr const char* kResultsCsvHeader =
    "m_c,shape,f_m_hz,depth_pct,pst,below_floor,wall_time_s";

namespace detail {

inline std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

inline std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return in;
}

inline std::string format_g(double v, int precision = 12) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// waveforms

/// Headerless CSV, one `time_s,value_v` row per sample.
inline void write_waveform_csv(const std::string& path, const SignalBuffer& signal) {
    std::ofstream out = detail::open_out(path);
    char buf[64];
    for (std::size_t i = 0; i < signal.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.17g\n", signal.time_at(i), signal.samples[i]);
        out << buf;
    }
}

/// Reads the CSV form back; the sample rate is recovered from the time
/// column, which limits it to what 12 significant digits preserve. Use
/// the binary frame for exact interchange.
[[nodiscard]] inline SignalBuffer read_waveform_csv(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    SignalBuffer sig;
    std::string line;
    double t_first = 0.0, t_second = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("waveform csv '" + path + "': malformed row '" + line + "'");
        const double t = std::stod(line.substr(0, comma));
        sig.samples.push_back(std::stod(line.substr(comma + 1)));
        if (sig.samples.size() == 1) t_first = t;
        if (sig.samples.size() == 2) t_second = t;
    }
    if (sig.samples.size() < 2)
        throw std::runtime_error("waveform csv '" + path + "': needs at least 2 rows");
    sig.t0 = t_first;
    sig.sample_rate = 1.0 / (t_second - t_first);
    return sig;
}

namespace detail {

template <typename T>
inline void write_le(std::ofstream& out, T value) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &value, 8);
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t swapped = 0;
        for (int i = 0; i < 8; ++i) swapped |= ((bits >> (8 * i)) & 0xffu) << (8 * (7 - i));
        bits = swapped;
    }
    char raw[8];
    std::memcpy(raw, &bits, 8);
    out.write(raw, 8);
}

template <typename T>
inline T read_le(std::ifstream& in) {
    static_assert(sizeof(T) == 8);
    char raw[8];
    in.read(raw, 8);
    if (in.gcount() != 8) throw std::runtime_error("binary waveform: truncated frame");
    std::uint64_t bits;
    std::memcpy(&bits, raw, 8);
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t swapped = 0;
        for (int i = 0; i < 8; ++i) swapped |= ((bits >> (8 * i)) & 0xffu) << (8 * (7 - i));
        bits = swapped;
    }
    T value;
    std::memcpy(&value, &bits, 8);
    return value;
}

}  // namespace detail

/// Little-endian binary frame: f64 sample rate, u64 sample count, then
/// the f64 samples. The start time is not part of the frame; readers
/// get t0 = 0.
inline void write_waveform_binary(const std::string& path, const SignalBuffer& signal) {
    std::ofstream out = detail::open_out(path, std::ios::binary);
    detail::write_le<double>(out, signal.sample_rate);
    detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(signal.size()));
    for (double v : signal.samples) detail::write_le<double>(out, v);
}

[[nodiscard]] inline SignalBuffer read_waveform_binary(const std::string& path) {
    std::ifstream in = detail::open_in(path, std::ios::binary);
    SignalBuffer sig;
    sig.sample_rate = detail::read_le<double>(in);
    const std::uint64_t count = detail::read_le<std::uint64_t>(in);
    if (!(sig.sample_rate > 0.0))
        throw std::runtime_error("binary waveform '" + path + "': invalid sample rate");
    sig.samples.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) sig.samples.push_back(detail::read_le<double>(in));
    return sig;
}

/// FIR taps as `index,coefficient` rows for cross-checks against
/// external design tools.
inline void write_taps_csv(const std::string& path, const FirFilter& filter) {
    std::ofstream out = detail::open_out(path);
    char buf[48];
    for (std::size_t i = 0; i < filter.taps.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, filter.taps[i]);
        out << buf;
    }
}

/// Instantaneous flicker sensation trace as `time_s,p_inst` rows.
inline void write_pinst_csv(const std::string& path, const SignalBuffer& trace) {
    std::ofstream out = detail::open_out(path);
    out << "time_s,p_inst\n";
    char buf[64];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9e\n", trace.time_at(i), trace.samples[i]);
        out << buf;
    }
}

// ---------------------------------------------------------------------------
// results

[[nodiscard]] inline std::string results_csv_text(const SweepResult& result) {
    std::string text = kResultsCsvHeader;
    text += '\n';
    char buf[160];
    for (const SweepRecord& r : result.records) {
        std::snprintf(buf, sizeof buf, "%.12g,%s,%.12g,%.12g,%.9e,%d,%.3f\n", r.mc,
                      std::string(short_name(r.shape)).c_str(), r.fm_hz, r.depth_pct, r.pst,
                      r.below_floor ? 1 : 0, r.wall_time_s);
        text += buf;
    }
    return text;
}

inline void write_results_csv(const std::string& path, const SweepResult& result) {
    detail::open_out(path) << results_csv_text(result);
}

/// Run metadata sidecar: fingerprint, tool version, and any per-point
/// failures (the CSV keeps failed rows at Pst = 0, flagged below
/// floor; the sidecar carries the diagnostics).
inline void write_meta_json(const std::string& path, const SweepResult& result) {
    nlohmann::json j;
    j["run_id"] = result.plan.run_id;
    j["stage"] = result.plan.stage;
    char fp[24];
    std::snprintf(fp, sizeof fp, "%016" PRIx64, result.plan_fingerprint);
    j["plan_fingerprint"] = fp;
    j["tool_version"] = result.tool_version;
    j["record_timing"] = result.plan.record_timing;
    j["points"] = result.records.size();
    j["complete"] = result.complete;
    j["failed_points"] = result.errors;
    detail::open_out(path) << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// plan files

namespace detail {

inline void require_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* key : allowed)
            if (item.key() == key) ok = true;
        if (!ok)
            throw std::invalid_argument("plan: unknown key '" + item.key() + "' in " + where);
    }
}

inline double require_number(const nlohmann::json& v, const std::string& what) {
    if (!v.is_number())
        throw std::invalid_argument("plan: " + what + " must be a number");
    return v.get<double>();
}

inline std::vector<double> number_array(const nlohmann::json& v, const std::string& what) {
    if (!v.is_array()) throw std::invalid_argument("plan: " + what + " must be an array");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(require_number(e, what + " entry"));
    return out;
}

}  // namespace detail

/// Parse a plan from its JSON form. Grids may be given explicitly or as
/// the string "default", which expands to the stage's standard grid.
[[nodiscard]] inline SweepPlan plan_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("plan: top level must be an object");
    detail::require_keys(j,
                         {"name", "stage", "carriers", "shapes", "fm_grid_hz", "depth_grid_pct",
                          "durations", "front_end", "flickermeter", "record_timing"},
                         "top level");

    SweepPlan plan;
    if (j.contains("name")) {
        if (!j["name"].is_string()) throw std::invalid_argument("plan: name must be a string");
        plan.run_id = j["name"].get<std::string>();
    }
    if (j.contains("stage")) {
        if (!j["stage"].is_number_integer())
            throw std::invalid_argument("plan: stage must be 1 or 2");
        plan.stage = j["stage"].get<int>();
        if (plan.stage != 1 && plan.stage != 2)
            throw std::invalid_argument("plan: stage must be 1 or 2");
    }

    if (!j.contains("carriers")) throw std::invalid_argument("plan: missing 'carriers'");
    if (!j["carriers"].is_array() || j["carriers"].empty())
        throw std::invalid_argument("plan: 'carriers' must be a non-empty array");
    for (const auto& c : j["carriers"]) {
        if (!c.is_object()) throw std::invalid_argument("plan: carrier entries must be objects");
        detail::require_keys(c, {"mc", "fc_hz", "urms_v"}, "carrier entry");
        CarrierSpec spec;
        if (!c.contains("mc")) throw std::invalid_argument("plan: carrier entry missing 'mc'");
        spec.clip_level = detail::require_number(c["mc"], "carrier mc");
        if (c.contains("fc_hz")) spec.fc_hz = detail::require_number(c["fc_hz"], "carrier fc_hz");
        if (c.contains("urms_v"))
            spec.urms_v = detail::require_number(c["urms_v"], "carrier urms_v");
        plan.carriers.push_back(spec);
    }

    if (!j.contains("shapes")) throw std::invalid_argument("plan: missing 'shapes'");
    if (!j["shapes"].is_array() || j["shapes"].empty())
        throw std::invalid_argument("plan: 'shapes' must be a non-empty array");
    for (const auto& s : j["shapes"]) {
        if (!s.is_string()) throw std::invalid_argument("plan: shape entries must be strings");
        plan.shapes.push_back(parse_shape(s.get<std::string>()));
    }

    const auto load_grid = [&](const char* key, const std::vector<double>& stage_default) {
        if (!j.contains(key))
            throw std::invalid_argument(std::string("plan: missing '") + key + "'");
        const nlohmann::json& v = j[key];
        if (v.is_string()) {
            if (v.get<std::string>() != "default")
                throw std::invalid_argument(std::string("plan: '") + key +
                                            "' must be an array of numbers or \"default\"");
            return stage_default;
        }
        std::vector<double> grid = detail::number_array(v, key);
        if (grid.empty())
            throw std::invalid_argument(std::string("plan: '") + key + "' must not be empty");
        return grid;
    };
    plan.fm_grid_hz = load_grid("fm_grid_hz", plan.stage == 1 ? stage1_fm_grid()
                                                              : stage2_fm_grid());
    plan.depth_grid_pct = load_grid("depth_grid_pct", plan.stage == 1 ? stage1_depth_grid()
                                                                      : stage2_depth_grid());

    if (j.contains("durations")) {
        const nlohmann::json& d = j["durations"];
        if (!d.is_object()) throw std::invalid_argument("plan: 'durations' must be an object");
        detail::require_keys(d, {"settle_s", "measure_s"}, "durations");
        if (d.contains("settle_s"))
            plan.durations.settle_s = detail::require_number(d["settle_s"], "settle_s");
        if (d.contains("measure_s"))
            plan.durations.measure_s = detail::require_number(d["measure_s"], "measure_s");
    }
    if (j.contains("front_end")) {
        const nlohmann::json& f = j["front_end"];
        if (!f.is_object()) throw std::invalid_argument("plan: 'front_end' must be an object");
        detail::require_keys(f, {"synthesis_rate_hz", "fir_order", "fir_cutoff_hz", "decimation"},
                             "front_end");
        if (f.contains("synthesis_rate_hz"))
            plan.front_end.synthesis_rate_hz =
                detail::require_number(f["synthesis_rate_hz"], "synthesis_rate_hz");
        if (f.contains("fir_order"))
            plan.front_end.fir_order =
                static_cast<int>(detail::require_number(f["fir_order"], "fir_order"));
        if (f.contains("fir_cutoff_hz"))
            plan.front_end.fir_cutoff_hz =
                detail::require_number(f["fir_cutoff_hz"], "fir_cutoff_hz");
        if (f.contains("decimation"))
            plan.front_end.decimation =
                static_cast<int>(detail::require_number(f["decimation"], "decimation"));
    }
    if (j.contains("flickermeter")) {
        const nlohmann::json& m = j["flickermeter"];
        if (!m.is_object()) throw std::invalid_argument("plan: 'flickermeter' must be an object");
        detail::require_keys(m, {"classifier_rate_hz", "window_s", "normalization_tau_s"},
                             "flickermeter");
        if (m.contains("classifier_rate_hz"))
            plan.meter.classifier_rate_hz =
                detail::require_number(m["classifier_rate_hz"], "classifier_rate_hz");
        if (m.contains("window_s"))
            plan.meter.window_s = detail::require_number(m["window_s"], "window_s");
        if (m.contains("normalization_tau_s"))
            plan.meter.normalization_tau_s =
                detail::require_number(m["normalization_tau_s"], "normalization_tau_s");
    }
    if (j.contains("record_timing")) {
        if (!j["record_timing"].is_boolean())
            throw std::invalid_argument("plan: 'record_timing' must be a boolean");
        plan.record_timing = j["record_timing"].get<bool>();
    }

    plan.validate();
    return plan;
}

[[nodiscard]] inline SweepPlan load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open plan file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("plan '" + path + "': " + e.what());
    }
    return plan_from_json(j);
}

[[nodiscard]] inline nlohmann::json plan_to_json(const SweepPlan& plan) {
    nlohmann::json j;
    j["name"] = plan.run_id;
    j["stage"] = plan.stage;
    j["carriers"] = nlohmann::json::array();
    for (const CarrierSpec& c : plan.carriers)
        j["carriers"].push_back({{"mc", c.clip_level}, {"fc_hz", c.fc_hz}, {"urms_v", c.urms_v}});
    j["shapes"] = nlohmann::json::array();
    for (Shape s : plan.shapes) j["shapes"].push_back(std::string(short_name(s)));
    j["fm_grid_hz"] = plan.fm_grid_hz;
    j["depth_grid_pct"] = plan.depth_grid_pct;
    j["durations"] = {{"settle_s", plan.durations.settle_s},
                      {"measure_s", plan.durations.measure_s}};
    j["front_end"] = {{"synthesis_rate_hz", plan.front_end.synthesis_rate_hz},
                      {"fir_order", plan.front_end.fir_order},
                      {"fir_cutoff_hz", plan.front_end.fir_cutoff_hz},
                      {"decimation", plan.front_end.decimation}};
    j["flickermeter"] = {{"classifier_rate_hz", plan.meter.classifier_rate_hz},
                         {"window_s", plan.meter.window_s},
                         {"normalization_tau_s", plan.meter.normalization_tau_s}};
    j["record_timing"] = plan.record_timing;
    return j;
}

inline void save_plan(const std::string& path, const SweepPlan& plan) {
    detail::open_out(path) << plan_to_json(plan).dump(2) << '\n';
}

}  // namespace flicsim
