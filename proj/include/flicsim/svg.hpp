// Native SVG line charts: no plotting dependency, CSV stays canonical.
// One chart = several colored polyline series over linear or log axes,
// with decade/nice-step ticks, grid lines, and a legend.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flicsim/sweep.hpp"

namespace flicsim {

struct ChartSeries {
    std::string label;
    std::string color;  // SVG color, e.g. "#d62728"
    std::vector<std::pair<double, double>> points;
};

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    int width = 860;
    int height = 540;
};

/// Plot colors matching the published curve convention.
[[nodiscard]] inline std::string shape_color(Shape s) {
    switch (s) {
        case Shape::Sinusoidal: return "#1f77b4";   // blue
        case Shape::Triangular: return "#2ca02c";   // green
        case Shape::Trapezoidal: return "#9467bd";  // purple
        case Shape::Rectangular: return "#d62728";  // red
    }
    return "#000000";
}

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

/// Step of roughly range/5 rounded to 1/2/5 x 10^k.
inline double nice_step(double range) {
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    if (frac <= 1.5) return mag;
    if (frac <= 3.5) return 2.0 * mag;
    if (frac <= 7.5) return 5.0 * mag;
    return 10.0 * mag;
}

}  // namespace detail

/// Render the chart as a standalone SVG document.
[[nodiscard]] inline std::string render_line_chart(const std::vector<ChartSeries>& series,
                                                   const ChartOptions& opt) {
    const double ml = 70, mr = 24, mt = 44, mb = 56;
    const double pw = opt.width - ml - mr;
    const double ph = opt.height - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (const ChartSeries& s : series) {
        for (const auto& [x, y] : s.points) {
            if (opt.log_x && !(x > 0.0)) continue;
            if (opt.log_y && !(y > 0.0)) continue;
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (!(xmin < xmax)) {
        xmin = opt.log_x ? 0.1 : 0.0;
        xmax = opt.log_x ? 10.0 : 1.0;
    }
    if (!(ymin <= ymax)) {
        ymin = opt.log_y ? 0.1 : 0.0;
        ymax = opt.log_y ? 10.0 : 1.0;
    }
    if (!opt.log_y) {
        ymin = std::min(0.0, ymin);
        ymax = ymax <= ymin ? ymin + 1.0 : ymax + 0.05 * (ymax - ymin);
    } else {
        ymax *= 1.2;
    }

    const auto x_px = [&](double x) {
        const double t = opt.log_x ? (std::log10(x) - std::log10(xmin)) /
                                         (std::log10(xmax) - std::log10(xmin))
                                   : (x - xmin) / (xmax - xmin);
        return ml + t * pw;
    };
    const auto y_px = [&](double y) {
        const double t = opt.log_y ? (std::log10(y) - std::log10(ymin)) /
                                         (std::log10(ymax) - std::log10(ymin))
                                   : (y - ymin) / (ymax - ymin);
        return mt + (1.0 - t) * ph;
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << opt.width << " "
       << opt.height << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << opt.width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << opt.title << "</text>\n";

    // ticks and grid
    std::vector<double> x_ticks, y_ticks;
    if (opt.log_x) {
        for (int e = static_cast<int>(std::floor(std::log10(xmin)));
             e <= static_cast<int>(std::ceil(std::log10(xmax))); ++e) {
            const double v = std::pow(10.0, e);
            if (v >= xmin * 0.999 && v <= xmax * 1.001) x_ticks.push_back(v);
        }
        if (x_ticks.empty()) x_ticks = {xmin, xmax};
    } else {
        const double step = detail::nice_step(xmax - xmin);
        for (double v = std::ceil(xmin / step) * step; v <= xmax + 1e-9 * step; v += step)
            x_ticks.push_back(v);
    }
    if (opt.log_y) {
        for (int e = static_cast<int>(std::floor(std::log10(ymin)));
             e <= static_cast<int>(std::ceil(std::log10(ymax))); ++e) {
            const double v = std::pow(10.0, e);
            if (v >= ymin * 0.999 && v <= ymax * 1.001) y_ticks.push_back(v);
        }
        if (y_ticks.empty()) y_ticks = {ymin, ymax};
    } else {
        const double step = detail::nice_step(ymax - ymin);
        for (double v = std::ceil(ymin / step) * step; v <= ymax + 1e-9 * step; v += step)
            y_ticks.push_back(v);
    }

    for (double v : x_ticks) {
        const double px = x_px(v);
        os << "<line x1=\"" << detail::svg_num(px) << "\" y1=\"" << detail::svg_num(mt)
           << "\" x2=\"" << detail::svg_num(px) << "\" y2=\"" << detail::svg_num(mt + ph)
           << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << detail::svg_num(px) << "\" y=\"" << detail::svg_num(mt + ph + 18)
           << "\" text-anchor=\"middle\" font-size=\"12\">" << detail::tick_label(v)
           << "</text>\n";
    }
    for (double v : y_ticks) {
        const double py = y_px(v);
        os << "<line x1=\"" << detail::svg_num(ml) << "\" y1=\"" << detail::svg_num(py)
           << "\" x2=\"" << detail::svg_num(ml + pw) << "\" y2=\"" << detail::svg_num(py)
           << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << detail::svg_num(ml - 8) << "\" y=\"" << detail::svg_num(py + 4)
           << "\" text-anchor=\"end\" font-size=\"12\">" << detail::tick_label(v) << "</text>\n";
    }

    // axes
    os << "<rect x=\"" << detail::svg_num(ml) << "\" y=\"" << detail::svg_num(mt) << "\" width=\""
       << detail::svg_num(pw) << "\" height=\"" << detail::svg_num(ph)
       << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opt.height - 12
       << "\" text-anchor=\"middle\" font-size=\"13\">" << opt.x_label << "</text>\n";
    os << "<text x=\"18\" y=\"" << mt + ph / 2
       << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " << mt + ph / 2
       << ")\">" << opt.y_label << "</text>\n";

    // series
    for (const ChartSeries& s : series) {
        std::ostringstream pts;
        bool any = false;
        for (const auto& [x, y] : s.points) {
            if (opt.log_x && !(x > 0.0)) continue;
            if (opt.log_y && !(y > 0.0)) continue;
            pts << detail::svg_num(x_px(x)) << "," << detail::svg_num(y_px(y)) << " ";
            any = true;
        }
        if (!any) continue;
        os << "<polyline fill=\"none\" stroke=\"" << s.color
           << "\" stroke-width=\"1.8\" points=\"" << pts.str() << "\"/>\n";
        for (const auto& [x, y] : s.points) {
            if (opt.log_x && !(x > 0.0)) continue;
            if (opt.log_y && !(y > 0.0)) continue;
            os << "<circle cx=\"" << detail::svg_num(x_px(x)) << "\" cy=\""
               << detail::svg_num(y_px(y)) << "\" r=\"2.4\" fill=\"" << s.color << "\"/>\n";
        }
    }

    // legend, top-right corner of the plot area
    double ly = mt + 16;
    for (const ChartSeries& s : series) {
        const double lx = ml + pw - 130;
        os << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 26 << "\" y2=\""
           << ly - 4 << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << lx + 32 << "\" y=\"" << ly << "\" font-size=\"12\">" << s.label
           << "</text>\n";
        ly += 18;
    }

    os << "</svg>\n";
    return os.str();
}

inline void write_svg(const std::string& path, const std::string& svg_text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << svg_text;
}

namespace detail {

[[nodiscard]] inline std::string trim_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace detail

/// Chart files for a finished sweep, written into out_dir. Stage 1
/// yields one file per (carrier, depth) with Pst over f_m (log axis);
/// stage 2 one file per (carrier, f_m) with Pst over depth. Each chart
/// carries one colored series per shape. Returns the file paths.
[[nodiscard]] inline std::vector<std::string> write_sweep_plots(const SweepResult& result,
                                                                const std::string& out_dir) {
    const SweepPlan& plan = result.plan;
    std::vector<std::string> written;

    const auto series_for = [&](double mc, double fixed, bool fixed_is_depth) {
        std::vector<ChartSeries> series;
        for (Shape shape : plan.shapes) {
            ChartSeries s;
            s.label = std::string(short_name(shape));
            s.color = shape_color(shape);
            for (const SweepRecord& r : result.records) {
                if (r.failed || r.mc != mc || r.shape != shape) continue;
                if (fixed_is_depth) {
                    if (r.depth_pct == fixed) s.points.emplace_back(r.fm_hz, r.pst);
                } else {
                    if (r.fm_hz == fixed) s.points.emplace_back(r.depth_pct, r.pst);
                }
            }
            std::sort(s.points.begin(), s.points.end());
            if (!s.points.empty()) series.push_back(std::move(s));
        }
        return series;
    };

    for (const CarrierSpec& c : plan.carriers) {
        if (plan.stage == 1) {
            for (double depth : plan.depth_grid_pct) {
                ChartOptions opt;
                opt.title = "Pst vs f_m, m_c=" + detail::trim_num(c.clip_level) + ", depth=" +
                            detail::trim_num(depth) + "%";
                opt.x_label = "modulating frequency f_m [Hz]";
                opt.y_label = "Pst";
                opt.log_x = true;
                const std::string path = out_dir + "/" + plan.run_id + "_mc" +
                                         detail::trim_num(c.clip_level) + "_depth" +
                                         detail::trim_num(depth) + ".svg";
                write_svg(path, render_line_chart(series_for(c.clip_level, depth, true), opt));
                written.push_back(path);
            }
        } else {
            for (double fm : plan.fm_grid_hz) {
                ChartOptions opt;
                opt.title = "Pst vs depth, m_c=" + detail::trim_num(c.clip_level) + ", f_m=" +
                            detail::trim_num(fm) + " Hz";
                opt.x_label = "modulation depth dU/U [%]";
                opt.y_label = "Pst";
                const std::string path = out_dir + "/" + plan.run_id + "_mc" +
                                         detail::trim_num(c.clip_level) + "_fm" +
                                         detail::trim_num(fm) + ".svg";
                write_svg(path, render_line_chart(series_for(c.clip_level, fm, false), opt));
                written.push_back(path);
            }
        }
    }
    return written;
}

}  // namespace flicsim
