#ifndef EFFUMAP_SVG_HPP
#define EFFUMAP_SVG_HPP

#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

/**
 * @file svg.hpp
 *
 * @brief Minimal SVG scatter and bar charts. Output depends only on the inputs,
 * so reruns produce identical files.
 */

namespace effumap::svg {

/**
 * @cond
 */
namespace detail {

inline std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline const char* palette(std::size_t i) {
    static const char* colors[] = { "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd" };
    return colors[i % 5];
}

inline void header(std::ostream& out, double width, double height) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height) << "\" viewBox=\"0 0 "
        << num(width) << ' ' << num(height) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline void text(std::ostream& out, double x, double y, const std::string& s, const char* anchor = "middle", int size = 12) {
    out << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\"" << size
        << "\" text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
}

}
/**
 * @endcond
 */

struct ScatterPanel {
    std::string title;
    /// First two columns are plotted.
    const Matrix* points = nullptr;
};

/**
 * Panels side by side, each with its own equal-aspect bounding box.
 */
inline void scatter(std::ostream& out, const std::vector<ScatterPanel>& panels, double panel_size = 400) {
    const double pad = 30;
    detail::header(out, panel_size * static_cast<double>(panels.size()), panel_size + pad);
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const Matrix& x = *panels[p].points;
        const double ox = panel_size * static_cast<double>(p);
        detail::text(out, ox + panel_size / 2, 20, panels[p].title);
        if (x.rows() == 0 || x.cols() < 2) {
            continue;
        }
        double lo0 = x(0, 0), hi0 = x(0, 0), lo1 = x(0, 1), hi1 = x(0, 1);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            lo0 = std::min(lo0, x(i, 0));
            hi0 = std::max(hi0, x(i, 0));
            lo1 = std::min(lo1, x(i, 1));
            hi1 = std::max(hi1, x(i, 1));
        }
        const double span = std::max({ hi0 - lo0, hi1 - lo1, 1e-12 });
        const double scale = (panel_size - 2 * pad) / span;
        const double cx = (lo0 + hi0) / 2, cy = (lo1 + hi1) / 2;
        out << "<rect x=\"" << detail::num(ox + pad / 2) << "\" y=\"" << detail::num(pad) << "\" width=\"" << detail::num(panel_size - pad)
            << "\" height=\"" << detail::num(panel_size - pad) << "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
        out << "<g fill=\"" << detail::palette(0) << "\" fill-opacity=\"0.6\">\n";
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double px = ox + panel_size / 2 + (x(i, 0) - cx) * scale;
            const double py = pad + (panel_size - pad) / 2 - (x(i, 1) - cy) * scale;
            out << "<circle cx=\"" << detail::num(px) << "\" cy=\"" << detail::num(py) << "\" r=\"1.5\"/>\n";
        }
        out << "</g>\n";
    }
    out << "</svg>\n";
}

struct BarSeries {
    std::string label;
    std::vector<double> values;
};

struct VerticalLine {
    std::string label;
    double x = 0;
};

/**
 * Grouped bars over bins [edges[b], edges[b+1]). With `log_counts` the height is log10(1 + value).
 */
inline void bar_chart(std::ostream& out, const std::string& title, const std::vector<double>& edges, const std::vector<BarSeries>& series,
    const std::vector<VerticalLine>& lines = {}, bool log_counts = false, double width = 640, double height = 360)
{
    const double left = 50, right = 20, top = 40, bottom = 40;
    detail::header(out, width, height);
    detail::text(out, width / 2, 20, title);
    if (edges.size() < 2 || series.empty()) {
        out << "</svg>\n";
        return;
    }
    const std::size_t bins = edges.size() - 1;
    auto height_of = [&](double v) { return log_counts ? std::log10(1 + v) : v; };
    double top_value = 0;
    for (const auto& s : series) {
        for (double v : s.values) {
            top_value = std::max(top_value, height_of(v));
        }
    }
    top_value = top_value > 0 ? top_value : 1;

    const double plot_w = width - left - right, plot_h = height - top - bottom;
    const double x0 = edges.front(), x1 = edges.back();
    auto xpos = [&](double x) { return left + (x - x0) / (x1 - x0) * plot_w; };
    const double slot = plot_w / static_cast<double>(bins);
    const double bar_w = slot / static_cast<double>(series.size());

    out << "<line x1=\"" << detail::num(left) << "\" y1=\"" << detail::num(top + plot_h) << "\" x2=\"" << detail::num(left + plot_w)
        << "\" y2=\"" << detail::num(top + plot_h) << "\" stroke=\"black\"/>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        out << "<g fill=\"" << detail::palette(s) << "\" fill-opacity=\"0.8\">\n";
        for (std::size_t b = 0; b < bins && b < series[s].values.size(); ++b) {
            const double h = height_of(series[s].values[b]) / top_value * plot_h;
            out << "<rect x=\"" << detail::num(left + slot * static_cast<double>(b) + bar_w * static_cast<double>(s)) << "\" y=\""
                << detail::num(top + plot_h - h) << "\" width=\"" << detail::num(bar_w) << "\" height=\"" << detail::num(h) << "\"/>\n";
        }
        out << "</g>\n";
        detail::text(out, width - right - 5, top + 14 * static_cast<double>(s + 1), series[s].label, "end", 11);
    }
    for (const auto& line : lines) {
        // Lines outside the binned range are pinned to the nearest edge and marked.
        const double x = xpos(std::clamp(line.x, x0, x1));
        const std::string label = line.x < x0 ? "< " + line.label : line.x > x1 ? line.label + " >" : line.label;
        out << "<line x1=\"" << detail::num(x) << "\" y1=\"" << detail::num(top) << "\" x2=\"" << detail::num(x) << "\" y2=\""
            << detail::num(top + plot_h) << "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
        detail::text(out, x, top - 4, label, "middle", 10);
    }
    detail::text(out, left, height - 15, detail::num(x0), "start", 10);
    detail::text(out, left + plot_w, height - 15, detail::num(x1), "end", 10);
    if (log_counts) {
        detail::text(out, 5, top - 4, "log10(1 + count)", "start", 10);
    }
    out << "</svg>\n";
}

}

#endif
