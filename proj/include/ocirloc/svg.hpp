// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocirloc/util.hpp"

namespace ocirloc {

/// One polyline on a plot.
struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points; // (x, y)
    bool markers = false;
};

struct PlotOptions {
    std::string x_label = "x";
    std::string y_label = "y";
    bool log_x = true;
    bool log_y = true;
    int width = 760;
    int height = 560;
};

namespace detail {

inline const char* series_color(std::size_t i) {
    static const char* palette[] = {"#d95f02", "#1b9e77", "#7570b3", "#e7298a",
                                    "#66a61e", "#e6ab02", "#a6761d", "#666666"};
    return palette[i % 8];
}

inline std::string tick_label(double v) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof(buf), "%g", v);
    return std::string(buf, buf + n);
}

} // namespace detail

/// Deterministic SVG line plot: same series in, same bytes out.
inline std::string render_line_plot(const std::vector<PlotSeries>& series,
                                    const PlotOptions& opts) {
    if (series.empty())
        throw std::invalid_argument("render_line_plot: no series");
    std::size_t total_points = 0;
    for (const auto& s : series)
        total_points += s.points.size();
    if (total_points == 0)
        throw std::invalid_argument("render_line_plot: no points");

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if ((opts.log_x && !(x > 0.0)) || (opts.log_y && !(y > 0.0)))
                throw std::invalid_argument("render_line_plot: log axis needs positive data");
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }

    auto expand = [](double lo, double hi, bool log_axis) {
        if (log_axis)
            return std::pair{std::pow(10.0, std::floor(std::log10(lo))),
                             std::pow(10.0, std::ceil(std::log10(hi) - 1e-12))};
        const double pad = (hi - lo) * 0.05 + 1e-12;
        return std::pair{lo - pad, hi + pad};
    };
    auto [x0, x1] = expand(xmin, xmax, opts.log_x);
    auto [y0, y1] = expand(ymin, ymax, opts.log_y);
    if (x1 <= x0)
        x1 = x0 + 1.0;
    if (y1 <= y0)
        y1 = y0 + 1.0;

    const double ml = 90, mr = 20, mt = 20, mb = 70;
    const double pw = opts.width - ml - mr;
    const double ph = opts.height - mt - mb;
    auto map_x = [&](double v) {
        const double t = opts.log_x ? (std::log10(v) - std::log10(x0)) /
                                          (std::log10(x1) - std::log10(x0))
                                    : (v - x0) / (x1 - x0);
        return ml + t * pw;
    };
    auto map_y = [&](double v) {
        const double t = opts.log_y ? (std::log10(v) - std::log10(y0)) /
                                          (std::log10(y1) - std::log10(y0))
                                    : (v - y0) / (y1 - y0);
        return mt + (1.0 - t) * ph;
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opts.width) +
           "\" height=\"" + std::to_string(opts.height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    auto decade_ticks = [](double lo, double hi) {
        std::vector<double> t;
        for (int e = static_cast<int>(std::floor(std::log10(lo)));
             e <= static_cast<int>(std::ceil(std::log10(hi))); ++e) {
            const double v = std::pow(10.0, e);
            if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9))
                t.push_back(v);
        }
        return t;
    };
    auto linear_ticks = [](double lo, double hi) {
        std::vector<double> t;
        const double step = std::pow(10.0, std::floor(std::log10((hi - lo) / 4.0)));
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12; v += step)
            t.push_back(v);
        while (t.size() > 12) {
            std::vector<double> half;
            for (std::size_t i = 0; i < t.size(); i += 2)
                half.push_back(t[i]);
            t = half;
        }
        return t;
    };

    // grid and ticks
    const auto xticks = opts.log_x ? decade_ticks(x0, x1) : linear_ticks(x0, x1);
    const auto yticks = opts.log_y ? decade_ticks(y0, y1) : linear_ticks(y0, y1);
    for (double v : xticks) {
        const std::string x = fmt_fixed(map_x(v), 2);
        svg += "<line x1=\"" + x + "\" y1=\"" + fmt_fixed(mt, 2) + "\" x2=\"" + x + "\" y2=\"" +
               fmt_fixed(mt + ph, 2) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + x + "\" y=\"" + fmt_fixed(mt + ph + 22, 2) +
               "\" font-size=\"13\" text-anchor=\"middle\">" + detail::tick_label(v) +
               "</text>\n";
    }
    for (double v : yticks) {
        const std::string y = fmt_fixed(map_y(v), 2);
        svg += "<line x1=\"" + fmt_fixed(ml, 2) + "\" y1=\"" + y + "\" x2=\"" +
               fmt_fixed(ml + pw, 2) + "\" y2=\"" + y +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt_fixed(ml - 8, 2) + "\" y=\"" + y +
               "\" font-size=\"13\" text-anchor=\"end\" dominant-baseline=\"middle\">" +
               detail::tick_label(v) + "</text>\n";
    }

    // frame
    svg += "<rect x=\"" + fmt_fixed(ml, 2) + "\" y=\"" + fmt_fixed(mt, 2) + "\" width=\"" +
           fmt_fixed(pw, 2) + "\" height=\"" + fmt_fixed(ph, 2) +
           "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    // axis labels
    svg += "<text x=\"" + fmt_fixed(ml + pw / 2, 2) + "\" y=\"" +
           fmt_fixed(mt + ph + 50, 2) + "\" font-size=\"15\" text-anchor=\"middle\">" +
           opts.x_label + "</text>\n";
    svg += "<text x=\"22\" y=\"" + fmt_fixed(mt + ph / 2, 2) +
           "\" font-size=\"15\" text-anchor=\"middle\" transform=\"rotate(-90 22 " +
           fmt_fixed(mt + ph / 2, 2) + ")\">" + opts.y_label + "</text>\n";

    // series
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        if (s.points.empty())
            continue;
        auto pts = s.points;
        std::sort(pts.begin(), pts.end());
        std::string poly;
        for (const auto& [x, y] : pts)
            poly += fmt_fixed(map_x(x), 2) + "," + fmt_fixed(map_y(y), 2) + " ";
        svg += "<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"" +
               detail::series_color(si) + "\" stroke-width=\"2\"/>\n";
        if (s.markers)
            for (const auto& [x, y] : pts)
                svg += "<circle cx=\"" + fmt_fixed(map_x(x), 2) + "\" cy=\"" +
                       fmt_fixed(map_y(y), 2) + "\" r=\"3.5\" fill=\"" +
                       detail::series_color(si) + "\"/>\n";
    }

    // legend
    const double lx = ml + pw - 230, ly0 = mt + 12;
    for (std::size_t si = 0; si < series.size(); ++si) {
        const std::string y = fmt_fixed(ly0 + 18.0 * static_cast<double>(si), 2);
        svg += "<line x1=\"" + fmt_fixed(lx, 2) + "\" y1=\"" + y + "\" x2=\"" +
               fmt_fixed(lx + 26, 2) + "\" y2=\"" + y + "\" stroke=\"" +
               detail::series_color(si) + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt_fixed(lx + 32, 2) + "\" y=\"" + y +
               "\" font-size=\"13\" dominant-baseline=\"middle\">" + series[si].label +
               "</text>\n";
    }

    svg += "</svg>\n";
    return svg;
}

} // namespace ocirloc
