#pragma once

// Tiny SVG emitters for the optional chart output. CSV stays the canonical
// artifact; these are simple polyline/scatter renderings of the same rows.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace facekit {

struct SvgSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (x, y)
};

namespace detail {

inline const char* kSvgPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};

struct SvgFrame {
    double x_min, x_max, y_min, y_max;
    static constexpr double width = 640.0, height = 420.0;
    static constexpr double pad_left = 60.0, pad_right = 20.0;
    static constexpr double pad_top = 30.0, pad_bottom = 45.0;

    double sx(double x) const {
        const double span = x_max > x_min ? x_max - x_min : 1.0;
        return pad_left + (x - x_min) / span * (width - pad_left - pad_right);
    }
    double sy(double y) const {
        const double span = y_max > y_min ? y_max - y_min : 1.0;
        return height - pad_bottom - (y - y_min) / span * (height - pad_top - pad_bottom);
    }
};

inline SvgFrame fit_frame(const std::vector<SvgSeries>& series) {
    SvgFrame f{0.0, 1.0, 0.0, 1.0};
    bool first = true;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (first) {
                f.x_min = f.x_max = x;
                f.y_min = f.y_max = y;
                first = false;
            } else {
                f.x_min = std::min(f.x_min, x);
                f.x_max = std::max(f.x_max, x);
                f.y_min = std::min(f.y_min, y);
                f.y_max = std::max(f.y_max, y);
            }
        }
    return f;
}

inline std::string svg_chart(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<SvgSeries>& series, bool lines) {
    const SvgFrame f = fit_frame(series);
    std::ostringstream out;
    out.precision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << SvgFrame::width
        << "\" height=\"" << SvgFrame::height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << SvgFrame::width / 2 << "\" y=\"18\" text-anchor=\"middle\" "
        << "font-size=\"14\">" << title << "</text>\n";

    // axes
    out << "<line x1=\"" << f.sx(f.x_min) << "\" y1=\"" << f.sy(f.y_min) << "\" x2=\""
        << f.sx(f.x_max) << "\" y2=\"" << f.sy(f.y_min)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << f.sx(f.x_min) << "\" y1=\"" << f.sy(f.y_min) << "\" x2=\""
        << f.sx(f.x_min) << "\" y2=\"" << f.sy(f.y_max)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << SvgFrame::width / 2 << "\" y=\"" << SvgFrame::height - 10
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    out << "<text x=\"14\" y=\"" << SvgFrame::height / 2
        << "\" font-size=\"12\" transform=\"rotate(-90 14 " << SvgFrame::height / 2
        << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
    out << "<text x=\"" << f.sx(f.x_min) << "\" y=\"" << f.sy(f.y_min) + 16
        << "\" font-size=\"10\" text-anchor=\"middle\">" << f.x_min << "</text>\n";
    out << "<text x=\"" << f.sx(f.x_max) << "\" y=\"" << f.sy(f.y_min) + 16
        << "\" font-size=\"10\" text-anchor=\"middle\">" << f.x_max << "</text>\n";
    out << "<text x=\"" << f.sx(f.x_min) - 6 << "\" y=\"" << f.sy(f.y_min)
        << "\" font-size=\"10\" text-anchor=\"end\">" << f.y_min << "</text>\n";
    out << "<text x=\"" << f.sx(f.x_min) - 6 << "\" y=\"" << f.sy(f.y_max) + 4
        << "\" font-size=\"10\" text-anchor=\"end\">" << f.y_max << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kSvgPalette[s % std::size(kSvgPalette)];
        if (lines && series[s].points.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& [x, y] : series[s].points)
                out << f.sx(x) << "," << f.sy(y) << " ";
            out << "\"/>\n";
        }
        for (const auto& [x, y] : series[s].points)
            out << "<circle cx=\"" << f.sx(x) << "\" cy=\"" << f.sy(y)
                << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        out << "<text x=\"" << SvgFrame::width - SvgFrame::pad_right << "\" y=\""
            << SvgFrame::pad_top + 14.0 * static_cast<double>(s)
            << "\" font-size=\"11\" text-anchor=\"end\" fill=\"" << color << "\">"
            << series[s].name << "</text>\n";
    }
    out << "</svg>\n";
    return std::move(out).str();
}

}  // namespace detail

inline std::string svg_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<SvgSeries>& series) {
    return detail::svg_chart(title, x_label, y_label, series, true);
}

inline std::string svg_scatter_chart(const std::string& title, const std::string& x_label,
                                     const std::string& y_label,
                                     const std::vector<SvgSeries>& series) {
    return detail::svg_chart(title, x_label, y_label, series, false);
}

}  // namespace facekit
